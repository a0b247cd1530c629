"""Fully connected feed-forward regression baselines.

Plain numpy implementation: 1 to 4 equal-width hidden layers, relu/tanh/sin
activations, a single linear output unit, Glorot-uniform weight init and
zero biases.  Gradients come from standard backpropagation; relu uses
derivative 0 at exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .util import NumericError

ACTIVATIONS = ("relu", "tanh", "sin")

_ACT = {
    "relu": (lambda z: np.maximum(z, 0.0), lambda z: (z > 0).astype(np.float64)),
    "tanh": (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
    "sin": (np.sin, np.cos),
}


@dataclass(frozen=True)
class MlpConfig:
    """Architecture of one dense baseline network."""

    n_layers: int
    hidden_size: int
    activation: str
    input_dim: int = 4
    output_dim: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.n_layers, int) or not 1 <= self.n_layers <= 4:
            raise ValueError(f"n_layers must be an int in [1, 4], got {self.n_layers!r}")
        if not isinstance(self.hidden_size, int) or self.hidden_size < 1:
            raise ValueError(f"hidden_size must be a positive int, got {self.hidden_size!r}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if self.input_dim < 1 or self.output_dim != 1:
            raise ValueError("input_dim must be >= 1 and output_dim must be 1")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.input_dim] + [self.hidden_size] * self.n_layers + [self.output_dim]
        return list(zip(dims[:-1], dims[1:]))


@dataclass
class MlpParams:
    """Per-layer weight matrices (fan_in, fan_out) and bias vectors."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]


def count_params(config: MlpConfig) -> int:
    return sum(fi * fo + fo for fi, fo in config.layer_dims)


def init_params(config: MlpConfig, rng: np.random.Generator) -> MlpParams:
    """Glorot-uniform weights, zero biases."""
    weights = []
    biases = []
    for fan_in, fan_out in config.layer_dims:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def _check_params(config: MlpConfig, params: MlpParams) -> None:
    dims = config.layer_dims
    if len(params.weights) != len(dims) or len(params.biases) != len(dims):
        raise ValueError(f"expected {len(dims)} layers, got {len(params.weights)}")
    for (fan_in, fan_out), W, b in zip(dims, params.weights, params.biases):
        if W.shape != (fan_in, fan_out) or b.shape != (fan_out,):
            raise ValueError(f"layer shape mismatch: want ({fan_in}, {fan_out}), got {W.shape} / {b.shape}")


def _check_inputs(config: MlpConfig, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != config.input_dim:
        raise ValueError(f"expected inputs of shape (batch, {config.input_dim}), got {X.shape}")
    return X


def predict_batch(config: MlpConfig, params: MlpParams, X) -> np.ndarray:
    """Network outputs for a batch of inputs, shape (batch,)."""
    X = _check_inputs(config, X)
    _check_params(config, params)
    act, _ = _ACT[config.activation]
    a = X
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W + b
        a = z if i == last else act(z)
    out = a[:, 0]
    if not np.isfinite(out).all():
        raise NumericError("non-finite network output")
    return out


def predict(config: MlpConfig, params: MlpParams, x) -> float:
    return float(predict_batch(config, params, np.asarray(x, dtype=np.float64)[None, :])[0])


def gradient_batch(config: MlpConfig, params: MlpParams, X, upstream) -> MlpParams:
    """Backprop gradients of sum_i upstream_i * f(x_i), summed over the batch."""
    X = _check_inputs(config, X)
    _check_params(config, params)
    upstream = np.asarray(upstream, dtype=np.float64).ravel()
    if upstream.shape != (X.shape[0],):
        raise ValueError(f"expected {X.shape[0]} upstream values, got {upstream.shape}")
    act, act_deriv = _ACT[config.activation]

    pre = []  # pre-activations per layer
    activations = [X]
    a = X
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W + b
        pre.append(z)
        a = z if i == last else act(z)
        activations.append(a)

    grad_w = [np.empty_like(W) for W in params.weights]
    grad_b = [np.empty_like(b) for b in params.biases]
    delta = upstream[:, None]  # (batch, 1) at the linear output
    for i in range(last, -1, -1):
        grad_w[i] = activations[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * act_deriv(pre[i - 1])
    grads = MlpParams(grad_w, grad_b)
    flat = flatten_params(config, grads)
    if not np.isfinite(flat).all():
        raise NumericError("non-finite gradient")
    return grads


def gradient(config: MlpConfig, params: MlpParams, x, upstream: float = 1.0) -> MlpParams:
    return gradient_batch(config, params, np.asarray(x, dtype=np.float64)[None, :], [upstream])


def flatten_params(config: MlpConfig, params: MlpParams) -> np.ndarray:
    parts = []
    for W, b in zip(params.weights, params.biases):
        parts.append(W.ravel())
        parts.append(b.ravel())
    return np.concatenate(parts)


def unflatten_params(config: MlpConfig, flat: np.ndarray) -> MlpParams:
    flat = np.asarray(flat, dtype=np.float64).ravel()
    if flat.shape != (count_params(config),):
        raise ValueError(f"expected {count_params(config)} flat values, got {flat.shape[0]}")
    weights = []
    biases = []
    pos = 0
    for fan_in, fan_out in config.layer_dims:
        weights.append(flat[pos : pos + fan_in * fan_out].reshape(fan_in, fan_out).copy())
        pos += fan_in * fan_out
        biases.append(flat[pos : pos + fan_out].copy())
        pos += fan_out
    return MlpParams(weights, biases)


class MlpModel:
    """A config plus its current parameters, with a flat-vector view for training."""

    kind = "mlp"

    def __init__(self, config: MlpConfig, params: MlpParams):
        self.config = config
        self.params = params
        _check_params(config, params)

    @classmethod
    def initialize(cls, config: MlpConfig, seed: int = 0) -> "MlpModel":
        return cls(config, init_params(config, np.random.default_rng(seed)))

    @property
    def n_params(self) -> int:
        return count_params(self.config)

    def predict(self, x) -> float:
        return predict(self.config, self.params, x)

    def predict_batch(self, X) -> np.ndarray:
        return predict_batch(self.config, self.params, X)

    def gradient_flat_batch(self, X, upstream) -> np.ndarray:
        return flatten_params(self.config, gradient_batch(self.config, self.params, X, upstream))

    def get_flat(self) -> np.ndarray:
        return flatten_params(self.config, self.params)

    def set_flat(self, flat: np.ndarray) -> None:
        self.params = unflatten_params(self.config, flat)
