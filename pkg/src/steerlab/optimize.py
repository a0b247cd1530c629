"""Setpoint-wise swarm search over trained reward models, judged on the plant.

For each setpoint, particle swarm optimization maximizes the model's
predicted (scaled) reward over raw steering space [0, 100]^3; the winning
configuration and the best dataset row are then re-measured on the plant by
averaging many protocol runs.  Summing the per-setpoint differences gives
the relative optimization gain: positive means model-guided search beat the
best configuration already present in the data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from . import plant
from .util import derive_seed, dump_json, stream


@dataclass(frozen=True)
class PsoConfig:
    """Swarm setup: constriction-style coefficients, box bounds, eval budget."""

    swarm_size: int = 40
    budget: int = 1000
    lower: float = 0.0
    upper: float = 100.0
    # tuned for tight convergence inside the default 25-generation budget;
    # heavier inertia leaves the swarm ~0.7 units wide at exhaustion
    inertia: float = 0.5
    cognitive: float = 1.5
    social: float = 1.5
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.swarm_size, int) or self.swarm_size < 2:
            raise ValueError(f"swarm_size must be an int >= 2, got {self.swarm_size!r}")
        if not isinstance(self.budget, int) or self.budget < self.swarm_size:
            raise ValueError(f"budget must be an int >= swarm_size, got {self.budget!r}")
        if not (np.isfinite(self.lower) and np.isfinite(self.upper) and self.lower < self.upper):
            raise ValueError(f"bounds must satisfy lower < upper, got ({self.lower}, {self.upper})")


def maximize(objective, n_dim: int, config: PsoConfig) -> tuple[np.ndarray, float, int]:
    """Maximize a batched objective over [lower, upper]^n_dim.

    ``objective`` maps positions (k, n_dim) to values (k,).  Spends exactly
    ``config.budget`` evaluations: whole generations of ``swarm_size``, with
    one final partial generation if the budget is not a multiple.  Personal
    and global bests update in particle index order, so results are
    deterministic for a given seed.  Positions leaving the box are clamped to
    the violated bound with that velocity component zeroed.

    Returns (best position, best value, evaluations used).
    """
    rng = np.random.default_rng(config.seed)
    size = config.swarm_size
    pos = rng.uniform(config.lower, config.upper, (size, n_dim))
    vel = np.zeros((size, n_dim))
    pbest_pos = pos.copy()
    pbest_val = np.full(size, -np.inf)
    gbest_pos = pos[0].copy()
    gbest_val = -np.inf

    used = 0
    while used < config.budget:
        k = min(size, config.budget - used)
        vals = np.asarray(objective(pos[:k]), dtype=np.float64).ravel()
        if vals.shape != (k,):
            raise ValueError(f"objective returned shape {vals.shape}, expected ({k},)")
        if not np.isfinite(vals).all():
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise RuntimeError(
                f"non-finite objective value {vals[bad]!r} at particle {bad}, position {pos[bad].tolist()}"
            )
        used += k
        for i in range(k):
            if vals[i] > pbest_val[i]:
                pbest_val[i] = vals[i]
                pbest_pos[i] = pos[i]
        for i in range(size):
            if pbest_val[i] > gbest_val:
                gbest_val = pbest_val[i]
                gbest_pos = pbest_pos[i].copy()
        if used >= config.budget:
            break
        r_cog = rng.uniform(size=(size, n_dim))
        r_soc = rng.uniform(size=(size, n_dim))
        vel = (
            config.inertia * vel
            + config.cognitive * r_cog * (pbest_pos - pos)
            + config.social * r_soc * (gbest_pos - pos)
        )
        pos = pos + vel
        low = pos < config.lower
        pos[low] = config.lower
        vel[low] = 0.0
        high = pos > config.upper
        pos[high] = config.upper
        vel[high] = 0.0
    return gbest_pos, float(gbest_val), used


def pso_optimize(model, preprocessor, setpoint: float, config: PsoConfig) -> tuple[float, float, float, float]:
    """Best raw steering (v, g, h) for a setpoint plus the model's value there.

    Candidate positions are raw steering vectors; each evaluation prepends
    the setpoint and runs the preprocessor's input scaling before asking the
    model, mirroring how training inputs were produced.
    """
    setpoint = float(setpoint)

    def objective(points: np.ndarray) -> np.ndarray:
        X = np.column_stack([np.full(len(points), setpoint), points])
        return model.predict_batch(preprocessor.scale_inputs(X))

    best, value, _ = maximize(objective, 3, config)
    return float(best[0]), float(best[1]), float(best[2]), value


def ground_truth_eval(
    setpoint: float,
    v: float,
    g: float,
    h: float,
    n_trajectories: int = 1000,
    seed: int = 0,
    noise: bool = True,
) -> float:
    """Mean measured reward over repeated protocol runs at one configuration.

    Trajectory t draws from a stream keyed by (seed, t), so the estimate is
    independent of evaluation order and reproducible.
    """
    if not isinstance(n_trajectories, int) or n_trajectories < 1:
        raise ValueError(f"n_trajectories must be a positive int, got {n_trajectories!r}")
    if not noise:
        return plant.run_protocol(setpoint, (v, g, h), np.random.default_rng(0), noise=False)
    values = [
        plant.run_protocol(setpoint, (v, g, h), stream(seed, t), noise=True)
        for t in range(n_trajectories)
    ]
    return float(np.mean(values))


def dataset_best(samples, setpoint: float) -> tuple[float, float, float]:
    """Steering of the highest-y dataset row at a setpoint (ties: smallest (v, g, h))."""
    best: plant.GridSample | None = None
    for s in samples:
        if s.p != setpoint:
            continue
        if (
            best is None
            or s.y > best.y
            or (s.y == best.y and (s.v, s.g, s.h) < (best.v, best.g, best.h))
        ):
            best = s
    if best is None:
        raise ValueError(f"no dataset rows at setpoint {setpoint!r}")
    return best.v, best.g, best.h


@dataclass(frozen=True)
class OptimizationResult:
    """Per-setpoint outcome: swarm pick, its model value, and both ground truths."""

    setpoint: float
    v: float
    g: float
    h: float
    predicted: float
    gt_pso: float
    gt_db: float

    @property
    def improvement(self) -> float:
        return self.gt_pso - self.gt_db

    def to_dict(self) -> dict:
        return {
            "setpoint": self.setpoint,
            "v": self.v,
            "g": self.g,
            "h": self.h,
            "predicted": self.predicted,
            "gt_pso": self.gt_pso,
            "gt_db": self.gt_db,
            "improvement": self.improvement,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizationResult":
        return cls(
            setpoint=float(data["setpoint"]),
            v=float(data["v"]),
            g=float(data["g"]),
            h=float(data["h"]),
            predicted=float(data["predicted"]),
            gt_pso=float(data["gt_pso"]),
            gt_db=float(data["gt_db"]),
        )


def rog(results, setpoints=None) -> float:
    """Relative optimization gain: sum over setpoints of gt_pso - gt_db.

    Exactly one result per setpoint is required; with ``setpoints`` given the
    result set must cover it exactly.  Adding a constant to both ground
    truths of any result leaves the value unchanged.
    """
    seen: set[float] = set()
    total = 0.0
    for r in results:
        if r.setpoint in seen:
            raise ValueError(f"duplicate result for setpoint {r.setpoint!r}")
        seen.add(r.setpoint)
        total += r.improvement
    if setpoints is not None:
        expected = {float(p) for p in setpoints}
        if seen != expected:
            missing = sorted(expected - seen)
            extra = sorted(seen - expected)
            raise ValueError(f"setpoint mismatch: missing {missing}, unexpected {extra}")
    return total


def run_optimization(
    model,
    preprocessor,
    samples,
    pso_config: PsoConfig | None = None,
    n_trajectories: int = 1000,
    seed: int = 0,
    noise: bool = True,
    setpoints=None,
) -> list[OptimizationResult]:
    """Swarm-search every setpoint and ground-truth both candidate and dataset best.

    All randomness (per-setpoint swarm seeds and trajectory streams) derives
    from ``seed``, so rerunning with the same trained model reproduces the
    results exactly.
    """
    base = pso_config if pso_config is not None else PsoConfig()
    if setpoints is None:
        setpoints = sorted({s.p for s in samples})
    results = []
    for i, p in enumerate(setpoints):
        cfg = replace(base, seed=derive_seed(seed, i, 0))
        v, g, h, predicted = pso_optimize(model, preprocessor, p, cfg)
        gt_pso = ground_truth_eval(p, v, g, h, n_trajectories, seed=derive_seed(seed, i, 1), noise=noise)
        bv, bg, bh = dataset_best(samples, p)
        gt_db = ground_truth_eval(p, bv, bg, bh, n_trajectories, seed=derive_seed(seed, i, 2), noise=noise)
        results.append(OptimizationResult(float(p), v, g, h, predicted, gt_pso, gt_db))
    return results


RESULTS_HEADER = ["p", "v", "g", "h", "predicted", "gt_pso", "gt_db", "improvement"]


def save_results_csv(results, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for r in results:
            writer.writerow(
                [repr(float(x)) for x in (r.setpoint, r.v, r.g, r.h, r.predicted, r.gt_pso, r.gt_db, r.improvement)]
            )


def load_results_csv(path) -> list[OptimizationResult]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULTS_HEADER:
            raise ValueError(f"unexpected results header {header!r}")
        results = []
        for row in reader:
            if not row:
                continue
            p, v, g, h, predicted, gt_pso, gt_db, _ = (float(x) for x in row)
            results.append(OptimizationResult(p, v, g, h, predicted, gt_pso, gt_db))
    return results


def save_summary_json(results, path, seed: int, n_trajectories: int, pso_config: PsoConfig | None = None) -> None:
    """Companion summary: the gain, the seeds, and the search settings used."""
    cfg = pso_config if pso_config is not None else PsoConfig()
    summary = {
        "rog": rog(results),
        "seed": seed,
        "n_trajectories": n_trajectories,
        "setpoints": [r.setpoint for r in results],
        "pso": {
            "swarm_size": cfg.swarm_size,
            "budget": cfg.budget,
            "lower": cfg.lower,
            "upper": cfg.upper,
            "inertia": cfg.inertia,
            "cognitive": cfg.cognitive,
            "social": cfg.social,
        },
        "results": [r.to_dict() for r in results],
    }
    dump_json(summary, path)
