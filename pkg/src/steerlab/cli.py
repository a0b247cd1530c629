"""Command-line entry points for the full collect/train/optimize/report flow.

The ``STEERLAB_RESULTS`` environment variable sets the default results
directory; every command also accepts ``--seed`` so any run can be
reproduced exactly.
"""

from __future__ import annotations

import csv
import json
import os

import click

from . import harness, optimize as opt_mod, plant, report as report_mod
from .pipeline import Preprocessor, samples_to_arrays, split_samples
from .util import dump_json

RESULTS_ENV = "STEERLAB_RESULTS"


def _results_dir() -> str:
    return os.environ.get(RESULTS_ENV, "results")


def _default_path(filename: str) -> str:
    directory = _results_dir()
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, filename)


@click.group()
def main() -> None:
    """Reward-model workbench over a synthetic steering plant."""


@main.command()
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Dataset CSV path.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--grid-step", type=int, default=10, show_default=True, help="Grid spacing; must divide 100.")
@click.option("--noise-free", is_flag=True, help="Disable measurement noise.")
def collect(out, seed, grid_step, noise_free) -> None:
    """Measure the full (p, v, g, h) grid and write the dataset CSV."""
    out = out or _default_path("dataset.csv")
    samples = plant.collect_grid(seed=seed, grid_step=grid_step, noise=not noise_free)
    plant.save_dataset(samples, out)
    click.echo(f"collected {len(samples)} samples -> {out}")


@main.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Fitted preprocessor JSON path.")
@click.option("--input-range", type=float, nargs=2, default=(-1.0, 1.0), show_default=True)
@click.option("--log-scaling/--no-log-scaling", default=True, show_default=True)
@click.option("--stratify/--no-stratify", default=True, show_default=True)
@click.option("--sample-weighting/--no-sample-weighting", default=False, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Split shuffle seed.")
def preprocess(data, out, input_range, log_scaling, stratify, sample_weighting, seed) -> None:
    """Fit input/target transforms on the train split and persist them."""
    out = out or _default_path("preprocessor.json")
    samples = plant.load_dataset(data)
    train_rows, val_rows, test_rows = split_samples(samples, seed=seed, stratify=stratify)
    X_train, y_train = samples_to_arrays(train_rows)
    pre = Preprocessor(
        input_range=tuple(input_range),
        log_scaling=log_scaling,
        stratify=stratify,
        sample_weighting=sample_weighting,
    ).fit(X_train, y_train)
    dump_json(pre.to_dict(), out)
    click.echo(f"split {len(samples)} -> train {len(train_rows)} / val {len(val_rows)} / test {len(test_rows)}")
    click.echo(f"preprocessor -> {out}")


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return harness.normalize_config(json.load(fh))


def _optimize_settings(do_optimize, swarm_size, budget, trajectories, eval_seed, noise_free):
    if not do_optimize:
        return None
    return harness.OptimizeSettings(
        swarm_size=swarm_size,
        budget=budget,
        n_trajectories=trajectories,
        seed=eval_seed,
        noise=not noise_free,
    )


@main.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Experiment record JSON path.")
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="Also write the model checkpoint here.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--repeats", type=int, default=1, show_default=True, help="Train under seed..seed+repeats-1.")
@click.option("--optimize/--no-optimize", "do_optimize", default=False, show_default=True)
@click.option("--swarm-size", type=int, default=40, show_default=True)
@click.option("--budget", type=int, default=1000, show_default=True)
@click.option("--trajectories", type=int, default=1000, show_default=True)
@click.option("--eval-seed", type=int, default=0, show_default=True)
@click.option("--noise-free", is_flag=True)
def train(data, config_path, out, checkpoint, seed, repeats, do_optimize, swarm_size, budget, trajectories, eval_seed, noise_free) -> None:
    """Train one configuration (optionally several seeds) and record the run."""
    samples = plant.load_dataset(data)
    config = _load_config(config_path)
    settings = _optimize_settings(do_optimize, swarm_size, budget, trajectories, eval_seed, noise_free)
    if repeats == 1:
        out = out or _default_path("record.json")
        record = harness.run_experiment(samples, config, seed=seed, optimize=settings)
        harness.save_record(record, out)
        if checkpoint:
            dump_json(record.checkpoint, checkpoint)
        status = "FAILED" if record.failed else "ok"
        gain = "" if record.rog is None else f", rog {record.rog:.3f}"
        click.echo(
            f"{status}: val mse {record.val_mse:.3e}, test mse {record.test_mse:.3e}{gain} "
            f"({record.epochs_run} epochs, {record.wall_seconds:.1f}s) -> {out}"
        )
    else:
        out = out or _default_path("records.jsonl")
        result = harness.repeat_train(
            samples,
            config,
            n_seeds=repeats,
            base_seed=seed,
            optimize=settings,
            progress=lambda i, total, rec: click.echo(f"  seed {rec.seed}: val mse {rec.val_mse:.3e} ({i}/{total})"),
        )
        harness.append_records(result.records, out)
        stats_path = os.path.splitext(out)[0] + ".stats.json"
        dump_json({"stats": result.stats, "failed_seeds": result.failed_seeds}, stats_path)
        click.echo(f"{repeats} runs -> {out}; stats -> {stats_path}")


def _resolve_cube(cube: str) -> dict:
    if cube == "quantum":
        return harness.quantum_cube()
    if cube == "classical":
        return harness.classical_cube()
    with open(cube, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "axes" not in data or "model_kind" not in data:
        raise click.ClickException("cube file must define model_kind and axes")
    return data


@main.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--cube", default="quantum", show_default=True, help="'quantum', 'classical', or a cube JSON path.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Record store (JSON lines), appended to.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--limit", type=int, default=None, help="Run only the first N configurations.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--optimize/--no-optimize", "do_optimize", default=False, show_default=True)
@click.option("--swarm-size", type=int, default=40, show_default=True)
@click.option("--budget", type=int, default=1000, show_default=True)
@click.option("--trajectories", type=int, default=1000, show_default=True)
@click.option("--eval-seed", type=int, default=0, show_default=True)
@click.option("--noise-free", is_flag=True)
def sweep(data, cube, out, seed, limit, workers, do_optimize, swarm_size, budget, trajectories, eval_seed, noise_free) -> None:
    """Expand a hyperparameter hypercube and run every configuration."""
    samples = plant.load_dataset(data)
    cube_spec = _resolve_cube(cube)
    out = out or _default_path("records.jsonl")
    settings = _optimize_settings(do_optimize, swarm_size, budget, trajectories, eval_seed, noise_free)
    n_total = len(harness.expand_grid(cube_spec["axes"]))
    if limit is not None:
        n_total = min(n_total, limit)
    click.echo(f"sweeping {n_total} configurations -> {out}")
    records = harness.sweep(
        samples,
        cube_spec,
        seed=seed,
        optimize=settings,
        limit=limit,
        workers=workers,
        out_path=out,
        progress=lambda i, total, rec: click.echo(
            f"  [{i}/{total}] {rec.config_hash[:12]} val mse {rec.val_mse:.3e}"
            + ("" if rec.rog is None else f", rog {rec.rog:.3f}")
        ),
    )
    failed = sum(1 for r in records if r.failed)
    click.echo(f"done: {len(records)} records, {failed} failed")


def _load_model_and_preprocessor(record_path, checkpoint_path, preprocessor_path):
    if record_path:
        with open(record_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return harness.model_from_checkpoint(data["checkpoint"]), Preprocessor.from_dict(data["preprocessor"])
    if not (checkpoint_path and preprocessor_path):
        raise click.ClickException("provide --record, or both --checkpoint and --preprocessor")
    model = harness.load_checkpoint(checkpoint_path)
    with open(preprocessor_path, "r", encoding="utf-8") as fh:
        pre = Preprocessor.from_dict(json.load(fh))
    return model, pre


@main.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--record", "record_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--checkpoint", "checkpoint_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--preprocessor", "preprocessor_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Per-setpoint results CSV.")
@click.option("--summary", type=click.Path(dir_okay=False), default=None, help="Summary JSON with the gain and seeds.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--swarm-size", type=int, default=40, show_default=True)
@click.option("--budget", type=int, default=1000, show_default=True)
@click.option("--trajectories", type=int, default=1000, show_default=True)
@click.option("--noise-free", is_flag=True)
def optimize(data, record_path, checkpoint_path, preprocessor_path, out, summary, seed, swarm_size, budget, trajectories, noise_free) -> None:
    """Swarm-search each setpoint of a trained model and measure ground truth."""
    samples = plant.load_dataset(data)
    model, pre = _load_model_and_preprocessor(record_path, checkpoint_path, preprocessor_path)
    out = out or _default_path("optimization.csv")
    summary = summary or _default_path("optimization_summary.json")
    pso_config = opt_mod.PsoConfig(swarm_size=swarm_size, budget=budget)
    results = opt_mod.run_optimization(
        model,
        pre,
        samples,
        pso_config=pso_config,
        n_trajectories=trajectories,
        seed=seed,
        noise=not noise_free,
    )
    opt_mod.save_results_csv(results, out)
    opt_mod.save_summary_json(results, summary, seed=seed, n_trajectories=trajectories, pso_config=pso_config)
    click.echo(f"rog {opt_mod.rog(results):.3f} over {len(results)} setpoints -> {out}, {summary}")


@main.command()
@click.option("--points", type=click.Path(exists=True, dir_okay=False), required=True, help="CSV with p,v,g,h columns.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trajectories", type=int, default=1000, show_default=True)
@click.option("--noise-free", is_flag=True)
def evaluate(points, out, seed, trajectories, noise_free) -> None:
    """Re-measure ground truth at arbitrary steering configurations."""
    out = out or _default_path("ground_truth.csv")
    with open(points, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not {"p", "v", "g", "h"}.issubset(header):
            raise click.ClickException("points CSV must have p,v,g,h columns")
        cols = {name: header.index(name) for name in ("p", "v", "g", "h")}
        rows = [tuple(float(row[cols[c]]) for c in ("p", "v", "g", "h")) for row in reader if row]
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p", "v", "g", "h", "gt"])
        for p, v, g, h in rows:
            gt = opt_mod.ground_truth_eval(p, v, g, h, n_trajectories=trajectories, seed=seed, noise=not noise_free)
            writer.writerow([repr(p), repr(v), repr(g), repr(h), repr(gt)])
    click.echo(f"evaluated {len(rows)} configurations -> {out}")


@main.command()
@click.option("--records", "records_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Report output directory.")
@click.option("--top-k", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, help="Unused; accepted for interface uniformity.")
def report(records_path, out, top_k, seed) -> None:
    """Summarize a record store into tables and figures."""
    records = harness.load_records(records_path)
    out = out or os.path.join(_results_dir(), "report")
    summary = report_mod.generate_report(records, out, top_k=top_k)
    click.echo(f"report over {summary['n_records']} records -> {out}")
    for kind, entry in summary["kinds"].items():
        line = f"  {kind}: {entry['count']} records"
        if "best_val_mse" in entry:
            line += f", best val mse {entry['best_val_mse']:.3e}"
        if "best_rog" in entry:
            line += f", best rog {entry['best_rog']:.3f} ({entry['rog_positive']}/{entry['rog_scored']} positive)"
        click.echo(line)


if __name__ == "__main__":
    main()
