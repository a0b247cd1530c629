"""Reporting over experiment record stores: tables, rankings, figures.

Emits machine-readable CSV/JSON next to rendered PNG figures so a sweep can
be inspected without re-running anything: top-k tables under both selection
metrics, a validation-MSE versus gain scatter, loss curves for the best
record of each model kind, and per-setpoint improvement bars.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import ExperimentRecord, select_top_k
from .util import dump_json

_KIND_COLORS = {"vqc": "#7b2d8b", "mlp": "#1f77b4"}


def _kind(record: ExperimentRecord) -> str:
    return record.config["model"]["kind"]


def _write_topk_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "config_hash", "kind", "seed", "n_params", "val_mse", "test_mse", "rog", "epochs_run"])
        for rank, r in enumerate(records, start=1):
            writer.writerow(
                [
                    rank,
                    r.config_hash,
                    _kind(r),
                    r.seed,
                    r.n_params,
                    repr(r.val_mse),
                    repr(r.test_mse),
                    "" if r.rog is None else repr(r.rog),
                    r.epochs_run,
                ]
            )


def _write_scatter_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config_hash", "kind", "seed", "val_mse", "test_mse", "rog"])
        for r in records:
            writer.writerow(
                [
                    r.config_hash,
                    _kind(r),
                    r.seed,
                    repr(r.val_mse),
                    repr(r.test_mse),
                    "" if r.rog is None else repr(r.rog),
                ]
            )


def _write_curves_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config_hash", "seed", "epoch", "train_loss", "val_loss", "learning_rate"])
        for r in records:
            for epoch, (tr, va, lr) in enumerate(zip(r.train_losses, r.val_losses, r.learning_rates), start=1):
                writer.writerow([r.config_hash, r.seed, epoch, repr(tr), repr(va), repr(lr)])


def _write_improvements_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config_hash", "kind", "seed", "setpoint", "gt_pso", "gt_db", "improvement"])
        for r in records:
            if not r.optimization:
                continue
            for res in r.optimization:
                writer.writerow(
                    [
                        r.config_hash,
                        _kind(r),
                        r.seed,
                        repr(res.setpoint),
                        repr(res.gt_pso),
                        repr(res.gt_db),
                        repr(res.improvement),
                    ]
                )


def _figure_scatter(records, path) -> bool:
    scored = [r for r in records if r.rog is not None and not r.failed]
    if not scored:
        return False
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for kind in sorted({_kind(r) for r in scored}):
        rows = [r for r in scored if _kind(r) == kind]
        ax.scatter(
            [r.val_mse for r in rows],
            [r.rog for r in rows],
            s=22,
            alpha=0.75,
            label=kind,
            color=_KIND_COLORS.get(kind),
        )
    ax.axhline(0.0, color="gray", lw=0.8, ls="--")
    ax.set_xscale("log")
    ax.set_xlabel("validation MSE")
    ax.set_ylabel("relative optimization gain")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True


def _figure_curves(records, path) -> bool:
    usable = [r for r in records if r.train_losses and not r.failed]
    if not usable:
        return False
    best_by_kind = {}
    for r in usable:
        kind = _kind(r)
        if kind not in best_by_kind or r.val_mse < best_by_kind[kind].val_mse:
            best_by_kind[kind] = r
    fig, axes = plt.subplots(1, len(best_by_kind), figsize=(5.2 * len(best_by_kind), 4.0), squeeze=False)
    for ax, (kind, r) in zip(axes[0], sorted(best_by_kind.items())):
        epochs = range(1, len(r.train_losses) + 1)
        ax.plot(epochs, r.train_losses, label="train", color="#444444")
        ax.plot(epochs, r.val_losses, label="validation", color=_KIND_COLORS.get(kind))
        ax.axvline(r.best_epoch, color="gray", lw=0.8, ls=":")
        ax.set_yscale("log")
        ax.set_xlabel("epoch")
        ax.set_ylabel(f"{r.config['train'].get('loss', 'mse')} loss")
        ax.set_title(f"{kind} (best val MSE {r.val_mse:.3g})")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True


def _figure_improvements(records, path) -> bool:
    scored = [r for r in records if r.optimization and not r.failed]
    if not scored:
        return False
    by_kind: dict[str, dict[float, list[float]]] = {}
    for r in scored:
        buckets = by_kind.setdefault(_kind(r), {})
        for res in r.optimization:
            buckets.setdefault(res.setpoint, []).append(res.improvement)
    fig, ax = plt.subplots(figsize=(6.8, 4.2))
    kinds = sorted(by_kind)
    width = 0.8 / len(kinds)
    setpoints = sorted({sp for buckets in by_kind.values() for sp in buckets})
    for j, kind in enumerate(kinds):
        buckets = by_kind[kind]
        xs = [i + (j - (len(kinds) - 1) / 2.0) * width for i, sp in enumerate(setpoints) if sp in buckets]
        means = [sum(buckets[sp]) / len(buckets[sp]) for sp in setpoints if sp in buckets]
        ax.bar(xs, means, width=width, label=kind, color=_KIND_COLORS.get(kind), alpha=0.85)
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.set_xticks(range(len(setpoints)))
    ax.set_xticklabels([f"{sp:g}" for sp in setpoints])
    ax.set_xlabel("setpoint")
    ax.set_ylabel("mean improvement over dataset best")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True


def generate_report(records, out_dir, top_k: int = 10) -> dict:
    """Write all report artifacts into ``out_dir`` and return the summary dict."""
    records = list(records)
    if not records:
        raise ValueError("no records to report on")
    os.makedirs(out_dir, exist_ok=True)

    usable = [r for r in records if not r.failed]
    scored = [r for r in usable if r.rog is not None]
    summary: dict = {
        "n_records": len(records),
        "n_failed": len(records) - len(usable),
        "kinds": {},
    }
    for kind in sorted({_kind(r) for r in records}):
        rows = [r for r in usable if _kind(r) == kind]
        kind_scored = [r for r in rows if r.rog is not None]
        entry: dict = {"count": len(rows)}
        if rows:
            best = min(rows, key=lambda r: (r.val_mse, r.config_hash))
            entry["best_val_mse"] = best.val_mse
            entry["best_val_mse_hash"] = best.config_hash
        if kind_scored:
            best_gain = max(kind_scored, key=lambda r: (r.rog, r.config_hash))
            entry["best_rog"] = best_gain.rog
            entry["best_rog_hash"] = best_gain.config_hash
            entry["rog_positive"] = sum(1 for r in kind_scored if r.rog > 0)
            entry["rog_scored"] = len(kind_scored)
        walls = [r.wall_seconds for r in rows if r.wall_seconds is not None]
        if walls:
            entry["mean_wall_seconds"] = sum(walls) / len(walls)
        summary["kinds"][kind] = entry

    top_val = select_top_k(usable, "val_mse_min", k=top_k)
    _write_topk_csv(top_val, os.path.join(out_dir, "topk_val_mse.csv"))
    summary["topk_val_mse"] = [r.config_hash for r in top_val]
    if scored:
        top_gain = select_top_k(scored, "rog_max", k=top_k)
        _write_topk_csv(top_gain, os.path.join(out_dir, "topk_rog.csv"))
        summary["topk_rog"] = [r.config_hash for r in top_gain]

    _write_scatter_csv(usable, os.path.join(out_dir, "mse_vs_rog.csv"))
    _write_curves_csv(usable, os.path.join(out_dir, "loss_curves.csv"))
    _write_improvements_csv(usable, os.path.join(out_dir, "improvements.csv"))

    figures = {
        "mse_vs_rog.png": _figure_scatter(usable, os.path.join(out_dir, "mse_vs_rog.png")),
        "loss_curves.png": _figure_curves(usable, os.path.join(out_dir, "loss_curves.png")),
        "improvement_by_setpoint.png": _figure_improvements(usable, os.path.join(out_dir, "improvement_by_setpoint.png")),
    }
    summary["figures"] = sorted(name for name, drawn in figures.items() if drawn)

    dump_json(summary, os.path.join(out_dir, "summary.json"))
    return summary
