"""Report generation: summary dict, CSV tables, and rendered figures."""

import csv
import json
import os

import pytest

from steerlab.harness import ExperimentRecord
from steerlab.optimize import OptimizationResult
from steerlab.report import generate_report


def make_record(h, kind="mlp", seed=0, val_mse=1.0, rog=None, optimization=None, failed=False):
    return ExperimentRecord(
        config={"model": {"kind": kind}, "train": {"loss": "mse"}, "data": {}},
        config_hash=h, seed=seed, n_params=10,
        checkpoint={}, preprocessor={},
        train_losses=[0.5, 0.3, 0.2], val_losses=[0.6, 0.4, 0.3],
        learning_rates=[0.01, 0.01, 0.01],
        best_epoch=3, epochs_run=3, stopped_early=False,
        val_loss=val_mse, val_mse=val_mse, test_mse=val_mse,
        failed=failed, rog=rog, optimization=optimization,
        wall_seconds=1.5,
    )


def scored_records():
    opt = [
        OptimizationResult(setpoint=0.0, v=40.0, g=60.0, h=50.0, predicted=1.0, gt_pso=-96.0, gt_db=-97.0),
        OptimizationResult(setpoint=50.0, v=49.0, g=48.0, h=65.0, predicted=1.2, gt_pso=-156.0, gt_db=-158.0),
    ]
    return [
        make_record("aa1", kind="mlp", val_mse=0.5, rog=3.0, optimization=opt),
        make_record("bb2", kind="vqc", val_mse=0.2, rog=-1.0, optimization=opt),
        make_record("cc3", kind="mlp", val_mse=0.9, rog=1.0, optimization=opt),
        make_record("dd4", kind="vqc", val_mse=9.9, failed=True),
    ]


class TestSummary:
    def test_counts_and_bests(self, tmp_path):
        summary = generate_report(scored_records(), tmp_path)
        assert summary["n_records"] == 4
        assert summary["n_failed"] == 1
        assert summary["kinds"]["mlp"]["count"] == 2
        assert summary["kinds"]["mlp"]["best_val_mse"] == 0.5
        assert summary["kinds"]["mlp"]["best_rog"] == 3.0
        assert summary["kinds"]["mlp"]["rog_positive"] == 2
        assert summary["kinds"]["vqc"]["best_val_mse"] == 0.2
        assert summary["kinds"]["vqc"]["rog_positive"] == 0

    def test_topk_ordering(self, tmp_path):
        summary = generate_report(scored_records(), tmp_path, top_k=2)
        assert summary["topk_val_mse"] == ["bb2", "aa1"]
        assert summary["topk_rog"] == ["aa1", "cc3"]

    def test_summary_json_written(self, tmp_path):
        summary = generate_report(scored_records(), tmp_path)
        on_disk = json.loads((tmp_path / "summary.json").read_text())
        assert on_disk["n_records"] == summary["n_records"]
        assert on_disk["topk_val_mse"] == summary["topk_val_mse"]

    def test_empty_records_raise(self, tmp_path):
        with pytest.raises(ValueError, match="no records"):
            generate_report([], tmp_path)


class TestArtifacts:
    def test_all_files_written_when_scored(self, tmp_path):
        generate_report(scored_records(), tmp_path)
        for name in (
            "summary.json", "topk_val_mse.csv", "topk_rog.csv",
            "mse_vs_rog.csv", "loss_curves.csv", "improvements.csv",
            "mse_vs_rog.png", "loss_curves.png", "improvement_by_setpoint.png",
        ):
            assert (tmp_path / name).exists(), name
            assert os.path.getsize(tmp_path / name) > 0, name

    def test_topk_csv_contents(self, tmp_path):
        generate_report(scored_records(), tmp_path, top_k=3)
        with open(tmp_path / "topk_val_mse.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["config_hash"] for r in rows] == ["bb2", "aa1", "cc3"]
        assert rows[0]["rank"] == "1"
        assert float(rows[0]["val_mse"]) == 0.2

    def test_curves_csv_one_row_per_epoch(self, tmp_path):
        generate_report(scored_records(), tmp_path)
        with open(tmp_path / "loss_curves.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        # three usable records, three epochs each
        assert len(rows) == 9
        assert {r["epoch"] for r in rows} == {"1", "2", "3"}

    def test_unscored_records_skip_gain_artifacts(self, tmp_path):
        records = [make_record("aa1"), make_record("bb2", kind="vqc")]
        summary = generate_report(records, tmp_path)
        assert "topk_rog" not in summary
        assert not (tmp_path / "topk_rog.csv").exists()
        assert not (tmp_path / "mse_vs_rog.png").exists()
        assert not (tmp_path / "improvement_by_setpoint.png").exists()
        # loss curves still render
        assert (tmp_path / "loss_curves.png").exists()
        assert summary["figures"] == ["loss_curves.png"]
