"""Dataset preprocessing: input scaling, target transform, split, weights.

Everything is fitted on the training split only and applied unchanged to
validation and test data.  Targets pass through a sign-preserving log,
``sign(y) * ln(1 + |y|)``, then an affine map taking the train range onto
[-0.5, 0.5]; values outside the train range extrapolate linearly in log
space with no clipping.  Optional sample weights rescale raw targets into
[1, 2] so high-reward rows count more during training.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TARGET_RANGE = (-0.5, 0.5)


def signed_log(y):
    """Monotone sign-preserving log: sign(y) * ln(1 + |y|)."""
    y = np.asarray(y, dtype=np.float64)
    return np.sign(y) * np.log1p(np.abs(y))


def inverse_signed_log(t):
    t = np.asarray(t, dtype=np.float64)
    return np.sign(t) * np.expm1(np.abs(t))


def scale_inputs(x, feature_min, feature_max, target_range) -> np.ndarray:
    """Affine per-feature map of [feature_min, feature_max] onto target_range."""
    x = np.asarray(x, dtype=np.float64)
    feature_min = np.asarray(feature_min, dtype=np.float64)
    feature_max = np.asarray(feature_max, dtype=np.float64)
    span = feature_max - feature_min
    if np.any(~np.isfinite(span)) or np.any(span <= 0):
        raise ValueError("degenerate feature bounds: every feature needs min < max")
    a, b = (float(target_range[0]), float(target_range[1]))
    if not a < b:
        raise ValueError(f"target range must be increasing, got ({a}, {b})")
    return (x - feature_min) / span * (b - a) + a


def samples_to_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    """Stack grid samples into inputs (n, 4) ordered (p, v, g, h) and targets (n,)."""
    X = np.array([[s.p, s.v, s.g, s.h] for s in samples], dtype=np.float64)
    y = np.array([s.y for s in samples], dtype=np.float64)
    return X, y


def _carve(indices: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # 15% validation and 15% test (floored), remainder trains
    n = len(indices)
    n_val = (15 * n) // 100
    n_test = (15 * n) // 100
    n_train = n - n_val - n_test
    return (
        indices[:n_train],
        indices[n_train : n_train + n_val],
        indices[n_train + n_val :],
    )


def split_samples(samples, seed: int = 0, stratify: bool = True):
    """Shuffle and partition into (train, val, test) lists of samples.

    With ``stratify`` the 70/15/15 carve happens independently inside each
    setpoint stratum (strata visited in sorted order), so every setpoint is
    proportionally represented in all three parts.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("cannot split an empty dataset")
    rng = np.random.default_rng(seed)
    if stratify:
        strata: dict[float, list[int]] = {}
        for i, s in enumerate(samples):
            strata.setdefault(s.p, []).append(i)
        train_idx: list[int] = []
        val_idx: list[int] = []
        test_idx: list[int] = []
        for p in sorted(strata):
            members = np.asarray(strata[p])
            order = members[rng.permutation(len(members))]
            tr, va, te = _carve(order)
            train_idx.extend(tr.tolist())
            val_idx.extend(va.tolist())
            test_idx.extend(te.tolist())
    else:
        order = rng.permutation(len(samples))
        tr, va, te = _carve(order)
        train_idx, val_idx, test_idx = tr.tolist(), va.tolist(), te.tolist()
    pick = lambda idx: [samples[i] for i in idx]
    return pick(train_idx), pick(val_idx), pick(test_idx)


@dataclass
class Preprocessor:
    """Fitted input/target transforms plus the flags that configured them."""

    input_range: tuple[float, float] = (-1.0, 1.0)
    log_scaling: bool = True
    stratify: bool = True
    sample_weighting: bool = False
    feature_min: np.ndarray | None = None
    feature_max: np.ndarray | None = None
    target_low: float | None = None
    target_high: float | None = None
    raw_target_min: float | None = None
    raw_target_max: float | None = None

    def __post_init__(self) -> None:
        lo, hi = (float(self.input_range[0]), float(self.input_range[1]))
        if not lo < hi:
            raise ValueError(f"input range must be increasing, got ({lo}, {hi})")
        self.input_range = (lo, hi)

    @property
    def fitted(self) -> bool:
        return self.feature_min is not None

    def _require_fitted(self) -> None:
        if not self.fitted:
            raise ValueError("preprocessor must be fitted before use")

    def fit(self, X_train, y_train) -> "Preprocessor":
        """Record per-feature bounds and target-transform bounds from train data."""
        X = np.asarray(X_train, dtype=np.float64)
        y = np.asarray(y_train, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
            raise ValueError("fit expects a non-empty (n, features) matrix and matching targets")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValueError("fit data must be finite")
        self.feature_min = X.min(axis=0)
        self.feature_max = X.max(axis=0)
        if np.any(self.feature_max - self.feature_min <= 0):
            raise ValueError("degenerate feature bounds: every feature needs min < max")
        t = signed_log(y) if self.log_scaling else y
        self.target_low = float(t.min())
        self.target_high = float(t.max())
        self.raw_target_min = float(y.min())
        self.raw_target_max = float(y.max())
        return self

    def scale_inputs(self, X) -> np.ndarray:
        self._require_fitted()
        return scale_inputs(X, self.feature_min, self.feature_max, self.input_range)

    def transform_targets(self, y) -> np.ndarray:
        """Log-transform (optional) then affine-map the train range to [-0.5, 0.5]."""
        self._require_fitted()
        t = signed_log(y) if self.log_scaling else np.asarray(y, dtype=np.float64)
        span = self.target_high - self.target_low
        if span == 0.0:
            return np.zeros_like(t)
        return (t - self.target_low) / span + TARGET_RANGE[0]

    def inverse_transform_targets(self, t) -> np.ndarray:
        self._require_fitted()
        t = np.asarray(t, dtype=np.float64)
        span = self.target_high - self.target_low
        raw = t - TARGET_RANGE[0]
        y_log = raw * span + self.target_low
        return inverse_signed_log(y_log) if self.log_scaling else y_log

    def sample_weights(self, y_raw) -> np.ndarray:
        """Raw targets mapped onto [1, 2]: weight = 1 + (y - min) / (max - min)."""
        self._require_fitted()
        y = np.asarray(y_raw, dtype=np.float64)
        span = self.raw_target_max - self.raw_target_min
        if span == 0.0:
            return np.ones_like(y)
        return 1.0 + (y - self.raw_target_min) / span

    def to_dict(self) -> dict:
        return {
            "input_range": list(self.input_range),
            "log_scaling": self.log_scaling,
            "stratify": self.stratify,
            "sample_weighting": self.sample_weighting,
            "feature_min": None if self.feature_min is None else [float(x) for x in self.feature_min],
            "feature_max": None if self.feature_max is None else [float(x) for x in self.feature_max],
            "target_low": self.target_low,
            "target_high": self.target_high,
            "raw_target_min": self.raw_target_min,
            "raw_target_max": self.raw_target_max,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Preprocessor":
        pre = cls(
            input_range=tuple(data["input_range"]),
            log_scaling=bool(data["log_scaling"]),
            stratify=bool(data["stratify"]),
            sample_weighting=bool(data["sample_weighting"]),
        )
        if data.get("feature_min") is not None:
            pre.feature_min = np.asarray(data["feature_min"], dtype=np.float64)
            pre.feature_max = np.asarray(data["feature_max"], dtype=np.float64)
            pre.target_low = float(data["target_low"])
            pre.target_high = float(data["target_high"])
            pre.raw_target_min = float(data["raw_target_min"])
            pre.raw_target_max = float(data["raw_target_max"])
        return pre


@dataclass
class SplitPart:
    """One split as model-ready arrays: scaled inputs, scaled targets, weights."""

    X: np.ndarray
    y: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.y)


@dataclass
class SplitDataset:
    train: SplitPart
    val: SplitPart
    test: SplitPart


def prepare_dataset(
    samples,
    input_range=(-1.0, 1.0),
    log_scaling: bool = True,
    stratify: bool = True,
    sample_weighting: bool = False,
    split_seed: int = 0,
) -> tuple[SplitDataset, Preprocessor]:
    """Split, fit on train, and transform all three parts.

    Sample weights apply to the training part only; validation and test carry
    unit weights so model selection sees unweighted losses.
    """
    train_rows, val_rows, test_rows = split_samples(samples, seed=split_seed, stratify=stratify)
    X_train, y_train = samples_to_arrays(train_rows)
    pre = Preprocessor(
        input_range=tuple(input_range),
        log_scaling=log_scaling,
        stratify=stratify,
        sample_weighting=sample_weighting,
    ).fit(X_train, y_train)

    def part(rows, weighted: bool) -> SplitPart:
        X_raw, y_raw = samples_to_arrays(rows)
        weights = pre.sample_weights(y_raw) if (weighted and sample_weighting) else np.ones(len(y_raw))
        return SplitPart(pre.scale_inputs(X_raw), pre.transform_targets(y_raw), weights)

    return SplitDataset(part(train_rows, True), part(val_rows, False), part(test_rows, False)), pre
