"""Training harness: loop, schedules, hypercube sweeps, selection, records.

One experiment = (dataset handling flags, model architecture, training
settings, seed).  Training runs weighted mini-batch gradient descent with a
plateau-halving learning rate, early stopping, and best-validation weight
restore.  Sweeps expand a named hyperparameter hypercube into experiment
configs, run each one, and append records to a JSON-lines store; top-k
selection and seed-repeat statistics sit on top of those records.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import mlp as mlp_mod
from . import vqc as vqc_mod
from .mlp import MlpConfig, MlpModel
from .optimize import OptimizationResult, PsoConfig, rog, run_optimization
from .pipeline import SplitDataset, SplitPart, prepare_dataset
from .util import NumericError, dump_json, to_jsonable
from .vqc import VqcConfig, VqcModel

MIN_DELTA = 1e-8

LOSSES = ("mse", "mae")
OPTIMIZERS = ("adam", "sgd")


def _loss_values(kind: str, preds: np.ndarray, targets: np.ndarray) -> np.ndarray:
    err = preds - targets
    if kind == "mse":
        return err * err
    return np.abs(err)


def _loss_deriv(kind: str, preds: np.ndarray, targets: np.ndarray) -> np.ndarray:
    err = preds - targets
    if kind == "mse":
        return 2.0 * err
    return np.sign(err)


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent settings; defaults match the standard schedule."""

    learning_rate: float = 0.01
    lr_factor: float = 0.5
    lr_patience: int = 7
    early_stop_patience: int = 10
    max_epochs: int = 100
    batch_size: int = 16
    loss: str = "mse"
    optimizer: str = "adam"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.lr_factor <= 0 or self.lr_factor >= 1:
            raise ValueError("learning_rate must be > 0 and lr_factor in (0, 1)")
        if self.lr_patience < 1 or self.early_stop_patience < 1:
            raise ValueError("patience values must be >= 1")
        if not isinstance(self.max_epochs, int) or self.max_epochs < 0:
            raise ValueError(f"max_epochs must be a non-negative int, got {self.max_epochs!r}")
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ValueError(f"batch_size must be a positive int, got {self.batch_size!r}")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")


class Adam:
    """Adam on a flat parameter vector (beta1=0.9, beta2=0.999, eps=1e-7)."""

    def __init__(self, dim: int, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-7):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(dim)
        self.v = np.zeros(dim)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray, lr: float) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return params - lr * m_hat / (np.sqrt(v_hat) + self.eps)


class Sgd:
    def __init__(self, dim: int):
        pass

    def step(self, params: np.ndarray, grad: np.ndarray, lr: float) -> np.ndarray:
        return params - lr * grad


@dataclass
class TrainingResult:
    """Per-epoch curves plus where/why training stopped."""

    train_losses: list[float]
    val_losses: list[float]
    learning_rates: list[float]
    best_epoch: int  # 1-based; 0 means no epoch improved on the initial weights
    best_val_loss: float
    epochs_run: int
    stopped_early: bool
    failed: bool = False
    failed_epoch: int | None = None


def evaluate_loss(model, part: SplitPart, kind: str = "mse") -> float:
    """Unweighted mean loss of the model on one split."""
    if len(part) == 0:
        raise ValueError("cannot evaluate a loss on an empty split")
    preds = model.predict_batch(part.X)
    return float(np.mean(_loss_values(kind, preds, part.y)))


def train(model, data: SplitDataset, config: TrainConfig) -> TrainingResult:
    """Fit the model in place and leave it at its best-validation weights.

    Each epoch reshuffles the training rows with the config seed's stream and
    walks them in mini-batches; per-sample weights multiply the loss.  When
    validation loss fails to improve by more than 1e-8 for ``lr_patience``
    epochs the learning rate halves; after ``early_stop_patience``
    non-improving epochs training stops.  A non-finite training or validation
    loss marks the run failed and stops immediately.  In every case the best
    weights seen are restored before returning.
    """
    rng = np.random.default_rng([config.seed, 1])
    X, y, w = data.train.X, data.train.y, data.train.weights
    n = len(y)
    if n == 0:
        raise ValueError("training split is empty")

    flat = model.get_flat()
    opt = Adam(flat.size) if config.optimizer == "adam" else Sgd(flat.size)
    lr = config.learning_rate

    best_flat = flat.copy()
    best_val = np.inf
    best_epoch = 0
    initial_val = evaluate_loss(model, data.val, config.loss)

    train_losses: list[float] = []
    val_losses: list[float] = []
    rates: list[float] = []
    plateau = 0
    since_best = 0
    stopped_early = False
    failed = False
    failed_epoch = None

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        try:
            for lo in range(0, n, config.batch_size):
                batch = order[lo : lo + config.batch_size]
                Xb, yb, wb = X[batch], y[batch], w[batch]
                preds = model.predict_batch(Xb)
                loss_sum += float(np.sum(wb * _loss_values(config.loss, preds, yb)))
                upstream = wb * _loss_deriv(config.loss, preds, yb) / len(batch)
                grad = model.gradient_flat_batch(Xb, upstream)
                model.set_flat(opt.step(model.get_flat(), grad, lr))
            train_loss = loss_sum / n
            val_loss = evaluate_loss(model, data.val, config.loss)
        except NumericError:
            # diverged weights: record the epoch and fall through to the
            # finiteness check so the run is marked failed, not crashed
            train_loss = float("nan")
            val_loss = float("nan")
        train_losses.append(train_loss)
        val_losses.append(val_loss)
        rates.append(lr)

        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            failed = True
            failed_epoch = epoch
            break

        if val_loss < best_val - MIN_DELTA:
            best_val = val_loss
            best_flat = model.get_flat().copy()
            best_epoch = epoch
            plateau = 0
            since_best = 0
        else:
            plateau += 1
            since_best += 1
            if plateau >= config.lr_patience:
                lr *= config.lr_factor
                plateau = 0
            if since_best >= config.early_stop_patience:
                stopped_early = True
                break

    model.set_flat(best_flat)
    return TrainingResult(
        train_losses=train_losses,
        val_losses=val_losses,
        learning_rates=rates,
        best_epoch=best_epoch,
        best_val_loss=float(best_val) if best_epoch > 0 else initial_val,
        epochs_run=len(train_losses),
        stopped_early=stopped_early,
        failed=failed,
        failed_epoch=failed_epoch,
    )


# --------------------------------------------------------------------------
# experiment configs
# --------------------------------------------------------------------------

DEFAULT_DATA_CONFIG = {
    "input_range": [-1.0, 1.0],
    "log_scaling": True,
    "stratify": True,
    "sample_weighting": False,
    "split_seed": 0,
}


def normalize_config(config: dict) -> dict:
    """Fill defaults and validate the {model, train, data} experiment config."""
    if "model" not in config or "kind" not in config["model"]:
        raise ValueError("experiment config requires a model section with a kind")
    model = dict(config["model"])
    kind = model["kind"]
    if kind == "vqc":
        VqcConfig(**{k: v for k, v in model.items() if k != "kind"})
    elif kind == "mlp":
        MlpConfig(**{k: v for k, v in model.items() if k != "kind"})
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    train_cfg = dict(config.get("train", {}))
    train_cfg.pop("seed", None)  # the run seed is supplied separately
    TrainConfig(**train_cfg)
    data = dict(DEFAULT_DATA_CONFIG)
    data.update(config.get("data", {}))
    data["input_range"] = [float(x) for x in data["input_range"]]
    return {"model": model, "train": train_cfg, "data": data}


def config_hash(config: dict) -> str:
    canonical = json.dumps(to_jsonable(normalize_config(config)), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_model(model_config: dict, seed: int = 0):
    """Instantiate and seed-initialize a model from its config dict."""
    cfg = dict(model_config)
    kind = cfg.pop("kind")
    if kind == "vqc":
        return VqcModel.initialize(VqcConfig(**cfg), seed=seed)
    if kind == "mlp":
        return MlpModel.initialize(MlpConfig(**cfg), seed=seed)
    raise ValueError(f"unknown model kind {kind!r}")


def model_to_checkpoint(model) -> dict:
    """Serializable snapshot: kind, architecture, named parameter arrays."""
    if model.kind == "vqc":
        cfg = model.config
        params = {
            "circuit": model.params.circuit,
            "encoding": model.params.encoding,
        }
        if cfg.output_scaling:
            params["output_weights"] = model.params.output_weights
            params["output_bias"] = model.params.output_bias
        config = {
            "kind": "vqc",
            "ansatz": cfg.ansatz,
            "n_layers": cfg.n_layers,
            "parallel_encoding": cfg.parallel_encoding,
            "output_scaling": cfg.output_scaling,
            "n_features": cfg.n_features,
        }
    else:
        cfg = model.config
        params = {
            "weights": [W for W in model.params.weights],
            "biases": [b for b in model.params.biases],
        }
        config = {
            "kind": "mlp",
            "n_layers": cfg.n_layers,
            "hidden_size": cfg.hidden_size,
            "activation": cfg.activation,
            "input_dim": cfg.input_dim,
            "output_dim": cfg.output_dim,
        }
    return to_jsonable({"kind": model.kind, "config": config, "params": params})


def model_from_checkpoint(data: dict):
    kind = data["kind"]
    cfg = {k: v for k, v in data["config"].items() if k != "kind"}
    params = data["params"]
    if kind == "vqc":
        config = VqcConfig(**cfg)
        return VqcModel(
            config,
            vqc_mod.VqcParams(
                circuit=np.asarray(params["circuit"], dtype=np.float64),
                encoding=np.asarray(params["encoding"], dtype=np.float64),
                output_weights=(
                    np.asarray(params["output_weights"], dtype=np.float64)
                    if config.output_scaling
                    else None
                ),
                output_bias=float(params["output_bias"]) if config.output_scaling else None,
            ),
        )
    if kind == "mlp":
        config = MlpConfig(**cfg)
        return MlpModel(
            config,
            mlp_mod.MlpParams(
                weights=[np.asarray(W, dtype=np.float64) for W in params["weights"]],
                biases=[np.asarray(b, dtype=np.float64) for b in params["biases"]],
            ),
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_checkpoint(model, path) -> None:
    dump_json(model_to_checkpoint(model), path)


def load_checkpoint(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_checkpoint(json.load(fh))


# --------------------------------------------------------------------------
# experiment records
# --------------------------------------------------------------------------

@dataclass
class ExperimentRecord:
    """Everything needed to reproduce and rank one training run."""

    config: dict
    config_hash: str
    seed: int
    n_params: int
    checkpoint: dict
    preprocessor: dict
    train_losses: list[float]
    val_losses: list[float]
    learning_rates: list[float]
    best_epoch: int
    epochs_run: int
    stopped_early: bool
    val_loss: float
    val_mse: float
    test_mse: float
    failed: bool = False
    failed_epoch: int | None = None
    optimization: list[OptimizationResult] | None = None
    rog: float | None = None
    wall_seconds: float | None = None

    def to_dict(self, with_timing: bool = True) -> dict:
        return to_jsonable(
            {
                "config": self.config,
                "config_hash": self.config_hash,
                "seed": self.seed,
                "n_params": self.n_params,
                "checkpoint": self.checkpoint,
                "preprocessor": self.preprocessor,
                "train_losses": self.train_losses,
                "val_losses": self.val_losses,
                "learning_rates": self.learning_rates,
                "best_epoch": self.best_epoch,
                "epochs_run": self.epochs_run,
                "stopped_early": self.stopped_early,
                "val_loss": self.val_loss,
                "val_mse": self.val_mse,
                "test_mse": self.test_mse,
                "failed": self.failed,
                "failed_epoch": self.failed_epoch,
                "optimization": None if self.optimization is None else [r.to_dict() for r in self.optimization],
                "rog": self.rog,
                "wall_seconds": self.wall_seconds if with_timing else None,
            }
        )

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentRecord":
        opt = data.get("optimization")
        return cls(
            config=data["config"],
            config_hash=data["config_hash"],
            seed=int(data["seed"]),
            n_params=int(data["n_params"]),
            checkpoint=data["checkpoint"],
            preprocessor=data["preprocessor"],
            train_losses=[float(x) for x in data["train_losses"]],
            val_losses=[float(x) for x in data["val_losses"]],
            learning_rates=[float(x) for x in data["learning_rates"]],
            best_epoch=int(data["best_epoch"]),
            epochs_run=int(data["epochs_run"]),
            stopped_early=bool(data["stopped_early"]),
            val_loss=float(data["val_loss"]),
            val_mse=float(data["val_mse"]),
            test_mse=float(data["test_mse"]),
            failed=bool(data["failed"]),
            failed_epoch=data.get("failed_epoch"),
            optimization=None if opt is None else [OptimizationResult.from_dict(r) for r in opt],
            rog=data.get("rog"),
            wall_seconds=data.get("wall_seconds"),
        )


@dataclass(frozen=True)
class OptimizeSettings:
    """How to score a trained model on the plant after training."""

    swarm_size: int = 40
    budget: int = 1000
    n_trajectories: int = 1000
    seed: int = 0
    noise: bool = True

    def pso_config(self) -> PsoConfig:
        return PsoConfig(swarm_size=self.swarm_size, budget=self.budget)


def run_experiment(samples, config: dict, seed: int = 0, optimize: OptimizeSettings | None = None) -> ExperimentRecord:
    """Split/fit/train once; optionally swarm-search and ground-truth the result.

    ``seed`` drives model init and batch shuffling.  The split seed lives in
    the data config so every seed repeat of a config sees the same split, and
    the optimization evaluation seed is fixed in ``optimize``, so record-to-
    record differences come from training randomness alone.
    """
    started = time.perf_counter()
    config = normalize_config(config)
    data_cfg = config["data"]
    data, preprocessor = prepare_dataset(
        samples,
        input_range=tuple(data_cfg["input_range"]),
        log_scaling=data_cfg["log_scaling"],
        stratify=data_cfg["stratify"],
        sample_weighting=data_cfg["sample_weighting"],
        split_seed=data_cfg["split_seed"],
    )
    model = build_model(config["model"], seed=seed)
    result = train(model, data, TrainConfig(**config["train"], seed=seed))
    val_mse = evaluate_loss(model, data.val, "mse")
    test_mse = evaluate_loss(model, data.test, "mse")

    optimization = None
    gain = None
    if optimize is not None and not result.failed:
        optimization = run_optimization(
            model,
            preprocessor,
            samples,
            pso_config=optimize.pso_config(),
            n_trajectories=optimize.n_trajectories,
            seed=optimize.seed,
            noise=optimize.noise,
        )
        gain = rog(optimization)

    return ExperimentRecord(
        config=config,
        config_hash=config_hash(config),
        seed=seed,
        n_params=model.n_params,
        checkpoint=model_to_checkpoint(model),
        preprocessor=preprocessor.to_dict(),
        train_losses=result.train_losses,
        val_losses=result.val_losses,
        learning_rates=result.learning_rates,
        best_epoch=result.best_epoch,
        epochs_run=result.epochs_run,
        stopped_early=result.stopped_early,
        val_loss=result.best_val_loss,
        val_mse=val_mse,
        test_mse=test_mse,
        failed=result.failed,
        failed_epoch=result.failed_epoch,
        optimization=optimization,
        rog=gain,
        wall_seconds=time.perf_counter() - started,
    )


# --------------------------------------------------------------------------
# hypercube sweeps
# --------------------------------------------------------------------------

def expand_grid(axes: dict) -> list[dict]:
    """Full cartesian product of named axes, in axis-declaration order."""
    names = list(axes)
    for name in names:
        values = axes[name]
        if not isinstance(values, (list, tuple)) or len(values) == 0:
            raise ValueError(f"axis {name!r} must be a non-empty list of values")
    return [dict(zip(names, combo)) for combo in itertools.product(*(axes[n] for n in names))]


def quantum_cube() -> dict:
    """Quantum model hypercube; expands to 1152 configurations."""
    return {
        "model_kind": "vqc",
        "axes": {
            "n_layers": [20, 40, 60],
            "batch_size": [16, 32],
            "loss": ["mse", "mae"],
            "optimizer": ["adam"],
            "input_range": [[0.0, 1.0], [-1.0, 1.0], [-0.5, 0.5]],
            "output_range": [[-0.5, 0.5]],
            "stratify": [True, False],
            "sample_weighting": [True, False],
            "log_scaling": [True],
            "circuit": [1, 2],
            "parallel_encoding": [True, False],
            "output_scaling": [True, False],
        },
    }


def classical_cube() -> dict:
    """Dense baseline hypercube (full cartesian product: 2304 configurations)."""
    return {
        "model_kind": "mlp",
        "axes": {
            "n_layers": [1, 2, 3, 4],
            "hidden_size": [40, 64, 128],
            "activation": ["relu", "tanh", "sin"],
            "batch_size": [16, 32],
            "loss": ["mse", "mae"],
            "optimizer": ["adam", "sgd"],
            "input_range": [[0.0, 1.0], [-1.0, 1.0]],
            "output_range": [[-0.5, 0.5]],
            "stratify": [True, False],
            "sample_weighting": [True, False],
            "log_scaling": [True],
        },
    }


_CIRCUIT_BY_INDEX = {1: "hea", 2: "alternating"}


def config_from_axes(model_kind: str, point: dict) -> dict:
    """Turn one hypercube grid point into a full experiment config."""
    point = dict(point)
    out_range = point.pop("output_range", [-0.5, 0.5])
    if [float(x) for x in out_range] != [-0.5, 0.5]:
        raise ValueError(f"only output range [-0.5, 0.5] is supported, got {out_range!r}")
    data = {
        "input_range": [float(x) for x in point.pop("input_range")],
        "stratify": bool(point.pop("stratify")),
        "sample_weighting": bool(point.pop("sample_weighting")),
        "log_scaling": bool(point.pop("log_scaling", True)),
    }
    train_cfg = {
        "batch_size": int(point.pop("batch_size")),
        "loss": point.pop("loss"),
        "optimizer": point.pop("optimizer"),
    }
    # optional training axes for custom cubes; presets pin these at defaults
    for key in ("learning_rate", "lr_factor", "lr_patience", "early_stop_patience", "max_epochs"):
        if key in point:
            train_cfg[key] = point.pop(key)
    if model_kind == "vqc":
        model = {
            "kind": "vqc",
            "ansatz": _CIRCUIT_BY_INDEX[int(point.pop("circuit"))],
            "n_layers": int(point.pop("n_layers")),
            "parallel_encoding": bool(point.pop("parallel_encoding")),
            "output_scaling": bool(point.pop("output_scaling")),
        }
    elif model_kind == "mlp":
        model = {
            "kind": "mlp",
            "n_layers": int(point.pop("n_layers")),
            "hidden_size": int(point.pop("hidden_size")),
            "activation": point.pop("activation"),
        }
    else:
        raise ValueError(f"unknown model kind {model_kind!r}")
    if point:
        raise ValueError(f"unknown hypercube axes {sorted(point)}")
    return normalize_config({"model": model, "train": train_cfg, "data": data})


_SWEEP_SAMPLES = None


def _sweep_init(samples) -> None:
    global _SWEEP_SAMPLES
    _SWEEP_SAMPLES = samples


def _sweep_job(args) -> dict:
    config, seed, optimize = args
    record = run_experiment(_SWEEP_SAMPLES, config, seed=seed, optimize=optimize)
    return record.to_dict()


def sweep(
    samples,
    cube: dict,
    seed: int = 0,
    optimize: OptimizeSettings | None = None,
    limit: int | None = None,
    workers: int = 1,
    out_path=None,
    progress=None,
) -> list[ExperimentRecord]:
    """Run every cube configuration once and optionally append records to a store.

    Records are appended to ``out_path`` (JSON lines) as they complete; writes
    happen only in this process, so the store never interleaves.  Each record
    is fully determined by (config, seed, dataset), making reruns comparable
    even when worker scheduling reorders completion.
    """
    points = expand_grid(cube["axes"])
    if limit is not None:
        points = points[:limit]
    configs = [config_from_axes(cube["model_kind"], pt) for pt in points]
    jobs = [(cfg, seed, optimize) for cfg in configs]
    records: list[ExperimentRecord] = []
    sink = open(out_path, "a", encoding="utf-8") if out_path is not None else None
    try:
        if workers <= 1:
            _sweep_init(samples)
            produced = map(_sweep_job, jobs)
            for i, data in enumerate(produced):
                records.append(ExperimentRecord.from_dict(data))
                if sink is not None:
                    sink.write(json.dumps(data, sort_keys=True) + "\n")
                    sink.flush()
                if progress is not None:
                    progress(i + 1, len(jobs), records[-1])
        else:
            with ProcessPoolExecutor(max_workers=workers, initializer=_sweep_init, initargs=(samples,)) as pool:
                for i, data in enumerate(pool.map(_sweep_job, jobs)):
                    records.append(ExperimentRecord.from_dict(data))
                    if sink is not None:
                        sink.write(json.dumps(data, sort_keys=True) + "\n")
                        sink.flush()
                    if progress is not None:
                        progress(i + 1, len(jobs), records[-1])
    finally:
        if sink is not None:
            sink.close()
    return records


# --------------------------------------------------------------------------
# selection and repeats
# --------------------------------------------------------------------------

SELECTION_METRICS = ("val_mse_min", "rog_max")


def select_top_k(records, metric: str, k: int = 10) -> list[ExperimentRecord]:
    """Best k non-failed records; ties break on the config hash for stability."""
    if metric not in SELECTION_METRICS:
        raise ValueError(f"metric must be one of {SELECTION_METRICS}, got {metric!r}")
    usable = [r for r in records if not r.failed]
    if metric == "rog_max":
        missing = [r.config_hash for r in usable if r.rog is None]
        if missing:
            raise ValueError(f"records without a gain value cannot be ranked by rog_max: {missing[:3]}")
        key = lambda r: (-r.rog, r.config_hash, r.seed)
    else:
        key = lambda r: (r.val_mse, r.config_hash, r.seed)
    return sorted(usable, key=key)[:k]


def mean_std(values) -> tuple[float, float]:
    """Mean and population standard deviation (ddof=0)."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot aggregate an empty sequence")
    return float(arr.mean()), float(arr.std(ddof=0))


@dataclass
class RepeatResult:
    """Records from seed repeats of one config plus summary statistics."""

    records: list[ExperimentRecord]
    stats: dict[str, dict[str, float]]
    failed_seeds: list[int] = field(default_factory=list)


def repeat_train(
    samples,
    config: dict,
    n_seeds: int = 10,
    base_seed: int = 0,
    optimize: OptimizeSettings | None = None,
    progress=None,
) -> RepeatResult:
    """Train one config under seeds base_seed + 0..n_seeds-1 and aggregate.

    Failed runs are kept in the record list and reported, but excluded from
    the statistics.
    """
    if not isinstance(n_seeds, int) or n_seeds < 1:
        raise ValueError(f"n_seeds must be a positive int, got {n_seeds!r}")
    records = []
    for i in range(n_seeds):
        record = run_experiment(samples, config, seed=base_seed + i, optimize=optimize)
        records.append(record)
        if progress is not None:
            progress(i + 1, n_seeds, record)
    usable = [r for r in records if not r.failed]
    stats: dict[str, dict[str, float]] = {}
    if usable:
        for name, getter in (
            ("val_mse", lambda r: r.val_mse),
            ("test_mse", lambda r: r.test_mse),
            ("wall_seconds", lambda r: r.wall_seconds),
        ):
            mean, std = mean_std([getter(r) for r in usable])
            stats[name] = {"mean": mean, "std": std}
        if all(r.rog is not None for r in usable):
            mean, std = mean_std([r.rog for r in usable])
            stats["rog"] = {"mean": mean, "std": std}
    return RepeatResult(
        records=records,
        stats=stats,
        failed_seeds=[r.seed for r in records if r.failed],
    )


# --------------------------------------------------------------------------
# record store
# --------------------------------------------------------------------------

def save_record(record: ExperimentRecord, path, with_timing: bool = False) -> None:
    """Write one record as JSON; timing is dropped by default so reruns match."""
    dump_json(record.to_dict(with_timing=with_timing), path)


def append_records(records, path) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


def load_records(path) -> list[ExperimentRecord]:
    """Read records from a .json file, a .jsonl store, or a directory of either."""
    if os.path.isdir(path):
        records = []
        for name in sorted(os.listdir(path)):
            if name.endswith(".json") or name.endswith(".jsonl"):
                records.extend(load_records(os.path.join(path, name)))
        return records
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read().strip()
    if not text:
        return []
    if str(path).endswith(".jsonl"):
        return [ExperimentRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
    data = json.loads(text)
    if isinstance(data, list):
        return [ExperimentRecord.from_dict(d) for d in data]
    return [ExperimentRecord.from_dict(data)]
