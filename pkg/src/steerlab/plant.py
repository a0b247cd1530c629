"""Synthetic industrial plant: lagged steering, a known optimum, noisy rewards.

The plant holds three steering variables (velocity, gain, shift) on [0, 100].
Actions increment the commanded values by at most 1 per axis per step; the
effective values follow with a first-order lag.  The reward is a smooth
concave fitness of the effective values around setpoint-dependent targets,
plus heteroscedastic Gaussian noise.  Closed forms for the fitness and its
maximizer are exposed so model-driven search can be judged against ground
truth.

Data collection replays the same measurement protocol at every grid point:
drive the commanded values to the target (saturated unit steps, then a
fractional step), let the lag settle, discard a 100-step swing-in, then
average the next 100 rewards.  Each grid point draws from its own
counter-keyed random stream, so collection order cannot change the data.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np

from .util import stream

LAG = 0.1
KEEP = 0.9  # 1 - LAG, kept literal so scalar and vector paths share it
STEER_LO = 0.0
STEER_HI = 100.0
DEFAULT_START = (50.0, 50.0, 50.0)
SETTLE_TOL = 1e-6
SWING_STEPS = 100
AVG_STEPS = 100

_MAX_DRIVE_STEPS = 400
_MAX_SETTLE_STEPS = 10_000


def optimal_velocity(p):
    return 33.7 + 0.31 * p


def optimal_gain(p):
    return 61.3 - 0.27 * p


def optimal_shift(p):
    return 47.9 + 17.3 * np.sin(np.pi * p / 100.0)


def noise_std(p):
    return 2.0 + 0.05 * p


def noise_free_fitness(p, v, g, h):
    """Deterministic reward at effective steering (v, g, h) under setpoint p.

    Consumption is a positive-definite quadratic around the optimal velocity
    and gain; fatigue penalizes shift error and velocities above 70.  The
    reward weights fatigue three times as heavily as consumption.
    """
    dv = v - optimal_velocity(p)
    dg = g - optimal_gain(p)
    dh = h - optimal_shift(p)
    consumption = 80.0 + 1.2 * p + (0.9 * dv * dv + 0.7 * dg * dg + 0.3 * dv * dg) / 100.0
    over = np.maximum(0.0, v - 70.0)
    fatigue = 5.0 + 0.8 * dh * dh / 100.0 + 0.6 * over * over / 50.0
    return -consumption - 3.0 * fatigue


def true_optimum(p) -> tuple[float, float, float, float]:
    """Maximizer of the noise-free fitness and its value, -(95 + 1.2 p)."""
    p = float(p)
    _check_setpoint(p)
    return (
        float(optimal_velocity(p)),
        float(optimal_gain(p)),
        float(optimal_shift(p)),
        -(95.0 + 1.2 * p),
    )


def _check_setpoint(p: float) -> None:
    if not np.isfinite(p) or not STEER_LO <= p <= STEER_HI:
        raise ValueError(f"setpoint must lie in [{STEER_LO}, {STEER_HI}], got {p!r}")


def _check_steering(values, name: str) -> tuple[float, float, float]:
    vals = tuple(float(x) for x in values)
    if len(vals) != 3:
        raise ValueError(f"{name} must have three components, got {len(vals)}")
    for x in vals:
        if not np.isfinite(x) or not STEER_LO <= x <= STEER_HI:
            raise ValueError(f"{name} components must lie in [{STEER_LO}, {STEER_HI}], got {x!r}")
    return vals


def _clamp(x: float) -> float:
    if x < STEER_LO:
        return STEER_LO
    if x > STEER_HI:
        return STEER_HI
    return x


def _advance_axis(cmd: float, eff: float, action: float) -> tuple[float, float]:
    # shared by step() and run_protocol() so both see identical arithmetic
    new_cmd = _clamp(cmd + action)
    return new_cmd, KEEP * eff + LAG * new_cmd


@dataclass
class PlantState:
    """Mutable plant state: setpoint, commanded/effective steering, rng."""

    setpoint: float
    commanded: tuple[float, float, float]
    effective: tuple[float, float, float]
    rng: np.random.Generator
    noise: bool = True


def make_state(
    setpoint: float,
    seed: int | np.random.Generator = 0,
    noise: bool = True,
    start: tuple[float, float, float] = DEFAULT_START,
) -> PlantState:
    """Fresh plant at the start point with commanded == effective."""
    setpoint = float(setpoint)
    _check_setpoint(setpoint)
    start = _check_steering(start, "start")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return PlantState(setpoint, start, start, rng, noise)


def step(state: PlantState, action) -> tuple[PlantState, float]:
    """Advance one step under an action in [-1, 1]^3; returns (state, reward)."""
    acts = tuple(float(a) for a in action)
    if len(acts) != 3:
        raise ValueError(f"action must have three components, got {len(acts)}")
    for a in acts:
        if not np.isfinite(a) or abs(a) > 1.0:
            raise ValueError(f"action components must lie in [-1, 1], got {a!r}")
    c0, e0 = _advance_axis(state.commanded[0], state.effective[0], acts[0])
    c1, e1 = _advance_axis(state.commanded[1], state.effective[1], acts[1])
    c2, e2 = _advance_axis(state.commanded[2], state.effective[2], acts[2])
    state.commanded = (c0, c1, c2)
    state.effective = (e0, e1, e2)
    reward = float(noise_free_fitness(state.setpoint, e0, e1, e2))
    if state.noise:
        reward += float(noise_std(state.setpoint)) * float(state.rng.standard_normal())
    return state, reward


def run_protocol(
    setpoint: float,
    target,
    rng: np.random.Generator,
    noise: bool = True,
    start: tuple[float, float, float] = DEFAULT_START,
) -> float:
    """One measurement: drive to ``target``, settle, swing in, average 100 rewards.

    The drive phase issues saturated unit steps per axis with a fractional
    final step, then holds until the lag residue drops below ``SETTLE_TOL``.
    Rewards before the averaging window are discarded, but their noise draws
    still advance ``rng``, matching a literal step-by-step rollout.
    """
    setpoint = float(setpoint)
    _check_setpoint(setpoint)
    t0, t1, t2 = _check_steering(target, "target")
    (c0, c1, c2) = _check_steering(start, "start")
    e0, e1, e2 = c0, c1, c2

    n_steps = 0
    while (c0, c1, c2) != (t0, t1, t2):
        if n_steps >= _MAX_DRIVE_STEPS:
            raise RuntimeError("drive phase failed to reach the target")
        d0 = min(1.0, max(-1.0, t0 - c0))
        d1 = min(1.0, max(-1.0, t1 - c1))
        d2 = min(1.0, max(-1.0, t2 - c2))
        c0, e0 = _advance_axis(c0, e0, d0)
        c1, e1 = _advance_axis(c1, e1, d1)
        c2, e2 = _advance_axis(c2, e2, d2)
        n_steps += 1

    settle = 0
    while max(abs(e0 - c0), abs(e1 - c1), abs(e2 - c2)) > SETTLE_TOL:
        if settle >= _MAX_SETTLE_STEPS:
            raise RuntimeError("lag failed to settle")
        c0, e0 = _advance_axis(c0, e0, 0.0)
        c1, e1 = _advance_axis(c1, e1, 0.0)
        c2, e2 = _advance_axis(c2, e2, 0.0)
        settle += 1
    n_steps += settle

    for _ in range(SWING_STEPS):
        c0, e0 = _advance_axis(c0, e0, 0.0)
        c1, e1 = _advance_axis(c1, e1, 0.0)
        c2, e2 = _advance_axis(c2, e2, 0.0)
    n_steps += SWING_STEPS

    eff_path = np.empty((AVG_STEPS, 3))
    for i in range(AVG_STEPS):
        c0, e0 = _advance_axis(c0, e0, 0.0)
        c1, e1 = _advance_axis(c1, e1, 0.0)
        c2, e2 = _advance_axis(c2, e2, 0.0)
        eff_path[i, 0] = e0
        eff_path[i, 1] = e1
        eff_path[i, 2] = e2
    n_steps += AVG_STEPS

    rewards = noise_free_fitness(setpoint, eff_path[:, 0], eff_path[:, 1], eff_path[:, 2])
    if noise:
        draws = rng.standard_normal(n_steps)
        rewards = rewards + noise_std(setpoint) * draws[-AVG_STEPS:]
    return float(np.mean(rewards))


@dataclass(frozen=True)
class GridSample:
    """One collected data point: setpoint, commanded steering, averaged reward."""

    p: float
    v: float
    g: float
    h: float
    y: float


def grid_levels(grid_step: int = 10) -> list[float]:
    if not isinstance(grid_step, int) or grid_step < 1 or 100 % grid_step != 0:
        raise ValueError(f"grid_step must be a positive divisor of 100, got {grid_step!r}")
    return [float(x) for x in range(0, 101, grid_step)]


def collect_grid(
    seed: int = 0,
    grid_step: int = 10,
    noise: bool = True,
    start: tuple[float, float, float] = DEFAULT_START,
) -> list[GridSample]:
    """Measure every (p, v, g, h) grid combination, ordered by grid index.

    Grid index runs lexicographically over (p, v, g, h).  Each point uses an
    independent stream keyed by (seed, index), so any subset collected in any
    order reproduces the same values.
    """
    levels = grid_levels(grid_step)
    samples = []
    for index, (p, v, g, h) in enumerate(itertools.product(levels, repeat=4)):
        rng = stream(seed, index)
        y = run_protocol(p, (v, g, h), rng, noise=noise, start=start)
        samples.append(GridSample(p, v, g, h, y))
    return samples


DATASET_HEADER = ["p", "v", "g", "h", "y"]


def save_dataset(samples, path) -> None:
    """Write samples as CSV; floats use repr so values round-trip exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATASET_HEADER)
        for s in samples:
            writer.writerow([repr(float(x)) for x in (s.p, s.v, s.g, s.h, s.y)])


def load_dataset(path) -> list[GridSample]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DATASET_HEADER:
            raise ValueError(f"unexpected dataset header {header!r}")
        samples = []
        for row in reader:
            if not row:
                continue
            if len(row) != 5:
                raise ValueError(f"malformed dataset row {row!r}")
            p, v, g, h, y = (float(x) for x in row)
            samples.append(GridSample(p, v, g, h, y))
    return samples
