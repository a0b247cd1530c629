"""Variational quantum circuit regression models.

Two ansatz families over an angle-encoded register:

* ``"hea"``: per layer, a feature map of RX(w * x) on every qubit, one
  RX/RY/RZ parameter triple per qubit, and a CZ ring.
* ``"alternating"``: blocks alternate between a rotation-pair pattern
  (RY/RZ columns, paired CNOTs, inner RY/RZ, closing CNOTs) and a
  Hadamard/CZ-chain/RX pattern, starting with the former.  Each block is
  preceded by its own feature map, so the input is re-encoded at every
  block (same for every "hea" layer).

Feature-map weights are trainable, one per (layer, qubit) slot.  With
``parallel_encoding`` the register doubles and feature j drives qubits j
and j + n_features.  The model output is the mean of per-qubit Pauli-Z
expectations, or a trainable weighted sum plus bias when
``output_scaling`` is on.

Gradients are exact: reverse-mode adjoint sweep for training (one forward
plus one backward pass per batch), and the parameter-shift rule exposed
separately as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import statevector as sv
from .statevector import CircuitSpec, Encoding, GateOp, Param, cnot, cz, h, rx, ry, rz
from .util import NumericError

ANSATZES = ("hea", "alternating")

_HALF_PI = 0.5 * np.pi


@dataclass(frozen=True)
class VqcConfig:
    """Architecture of one quantum regression model."""

    ansatz: str = "hea"
    n_layers: int = 1
    parallel_encoding: bool = False
    output_scaling: bool = False
    n_features: int = 4

    def __post_init__(self) -> None:
        if self.ansatz not in ANSATZES:
            raise ValueError(f"ansatz must be one of {ANSATZES}, got {self.ansatz!r}")
        if not isinstance(self.n_layers, int) or self.n_layers < 1:
            raise ValueError(f"n_layers must be a positive int, got {self.n_layers!r}")
        if not isinstance(self.n_features, int) or self.n_features < 1:
            raise ValueError(f"n_features must be a positive int, got {self.n_features!r}")
        if self.n_qubits > sv.MAX_QUBITS:
            raise ValueError(f"register of {self.n_qubits} qubits exceeds the {sv.MAX_QUBITS}-qubit limit")

    @property
    def n_qubits(self) -> int:
        return self.n_features * 2 if self.parallel_encoding else self.n_features


@dataclass
class VqcParams:
    """Trainable values grouped by role; shapes are fixed by the config."""

    circuit: np.ndarray
    encoding: np.ndarray
    output_weights: np.ndarray | None = None
    output_bias: float | None = None


def _feature_map(gates: list[GateOp], n_qubits: int, n_features: int, weight_base: int) -> int:
    for q in range(n_qubits):
        gates.append(rx(q, Encoding(q % n_features, weight_base + q)))
    return weight_base + n_qubits


def _hea_layer(gates: list[GateOp], n_qubits: int, param_base: int) -> int:
    for q in range(n_qubits):
        gates.append(rx(q, Param(param_base + 3 * q)))
    for q in range(n_qubits):
        gates.append(ry(q, Param(param_base + 3 * q + 1)))
    for q in range(n_qubits):
        gates.append(rz(q, Param(param_base + 3 * q + 2)))
    for q in range(n_qubits - 1):
        gates.append(cz(q, q + 1))
    if n_qubits > 2:
        gates.append(cz(n_qubits - 1, 0))
    return param_base + 3 * n_qubits


def _pair_block(gates: list[GateOp], n_qubits: int, param_base: int) -> int:
    """RY/RZ columns, CNOTs on qubit pairs, inner RY/RZ, closing CNOTs."""
    p = param_base
    for q in range(n_qubits):
        gates.append(ry(q, Param(p + q)))
    for q in range(n_qubits):
        gates.append(rz(q, Param(p + n_qubits + q)))
    p += 2 * n_qubits
    for k in range(n_qubits // 2):
        gates.append(cnot(2 * k + 1, 2 * k))
    inner = list(range(1, n_qubits - 1))
    for i, q in enumerate(inner):
        gates.append(ry(q, Param(p + i)))
    for i, q in enumerate(inner):
        gates.append(rz(q, Param(p + len(inner) + i)))
    p += 2 * len(inner)
    for k in range(n_qubits // 2 - 1):
        gates.append(cnot(2 * k + 2, 2 * k + 1))
    return p


def _chain_block(gates: list[GateOp], n_qubits: int, param_base: int) -> int:
    """Hadamard column, CZ chain from the top qubit down, RX column."""
    for q in range(n_qubits):
        gates.append(h(q))
    for q in range(n_qubits - 1, 0, -1):
        gates.append(cz(q, q - 1))
    for q in range(n_qubits):
        gates.append(rx(q, Param(param_base + q)))
    return param_base + n_qubits


@lru_cache(maxsize=None)
def build_circuit(config: VqcConfig) -> CircuitSpec:
    """Materialize the gate list for a config (cached; configs are frozen)."""
    n_qubits = config.n_qubits
    gates: list[GateOp] = []
    param_base = 0
    weight_base = 0
    for layer in range(config.n_layers):
        weight_base = _feature_map(gates, n_qubits, config.n_features, weight_base)
        if config.ansatz == "hea":
            param_base = _hea_layer(gates, n_qubits, param_base)
        elif layer % 2 == 0:
            param_base = _pair_block(gates, n_qubits, param_base)
        else:
            param_base = _chain_block(gates, n_qubits, param_base)
    return CircuitSpec(n_qubits, tuple(gates), n_features=config.n_features)


def count_params(config: VqcConfig) -> int:
    """Total trainable values: circuit angles, encoding weights, output head."""
    circuit = build_circuit(config)
    total = circuit.n_params + circuit.n_weights
    if config.output_scaling:
        total += config.n_qubits + 1
    return total


def init_params(config: VqcConfig, rng: np.random.Generator) -> VqcParams:
    """Circuit angles uniform in (-pi, pi], unit encoding weights, mean output head."""
    circuit = build_circuit(config)
    angles = rng.uniform(-np.pi, np.pi, circuit.n_params)
    encoding = np.ones(circuit.n_weights)
    if config.output_scaling:
        return VqcParams(
            circuit=angles,
            encoding=encoding,
            output_weights=np.full(config.n_qubits, 1.0 / config.n_qubits),
            output_bias=0.0,
        )
    return VqcParams(circuit=angles, encoding=encoding)


def _check_params(config: VqcConfig, params: VqcParams) -> None:
    circuit = build_circuit(config)
    circ = np.asarray(params.circuit, dtype=np.float64)
    enc = np.asarray(params.encoding, dtype=np.float64)
    if circ.shape != (circuit.n_params,):
        raise ValueError(f"expected {circuit.n_params} circuit parameters, got shape {circ.shape}")
    if enc.shape != (circuit.n_weights,):
        raise ValueError(f"expected {circuit.n_weights} encoding weights, got shape {enc.shape}")
    if config.output_scaling:
        if params.output_weights is None or params.output_bias is None:
            raise ValueError("output_scaling=True requires output weights and bias")
        out = np.asarray(params.output_weights, dtype=np.float64)
        if out.shape != (config.n_qubits,):
            raise ValueError(f"expected {config.n_qubits} output weights, got shape {out.shape}")
    elif params.output_weights is not None or params.output_bias is not None:
        raise ValueError("output head supplied but output_scaling is off")
    flat = flatten_params(config, params)
    bad = np.flatnonzero(~np.isfinite(flat))
    if bad.size:
        raise NumericError(f"non-finite parameter at flat index {int(bad[0])}")


def _check_inputs(config: VqcConfig, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != config.n_features:
        raise ValueError(f"expected inputs of shape (batch, {config.n_features}), got {X.shape}")
    return X


def _gate_angle(source, circ_params: np.ndarray, weights: np.ndarray, X: np.ndarray):
    if isinstance(source, Param):
        return circ_params[source.index]
    if isinstance(source, Encoding):
        return weights[source.weight_index] * X[:, source.feature]
    return source.value  # Fixed


def _forward(circuit: CircuitSpec, circ_params: np.ndarray, weights: np.ndarray, X: np.ndarray) -> np.ndarray:
    n = circuit.n_qubits
    amps = sv.zero_amplitudes(n, (X.shape[0],))
    for gate in circuit.gates:
        angle = _gate_angle(gate.angle, circ_params, weights, X) if gate.angle is not None else None
        amps = sv.apply_resolved(amps, gate, angle, n)
    return amps


@lru_cache(maxsize=None)
def _sign_matrix(n_qubits: int) -> np.ndarray:
    cols = np.column_stack([sv.z_signs(n_qubits, q) for q in range(n_qubits)])
    cols.setflags(write=False)
    return cols


def _z_expectations(amps: np.ndarray, n_qubits: int) -> np.ndarray:
    probs = amps.real**2 + amps.imag**2
    return probs @ _sign_matrix(n_qubits)


def _output_coeffs(config: VqcConfig, params: VqcParams) -> np.ndarray:
    if config.output_scaling:
        return np.asarray(params.output_weights, dtype=np.float64)
    return np.full(config.n_qubits, 1.0 / config.n_qubits)


def predict_batch(config: VqcConfig, params: VqcParams, X) -> np.ndarray:
    """Model outputs for a batch of scaled inputs, shape (batch,)."""
    X = _check_inputs(config, X)
    _check_params(config, params)
    circuit = build_circuit(config)
    amps = _forward(circuit, np.asarray(params.circuit, float), np.asarray(params.encoding, float), X)
    zq = _z_expectations(amps, circuit.n_qubits)
    out = zq @ _output_coeffs(config, params)
    if config.output_scaling:
        out = out + params.output_bias
    return out


def predict(config: VqcConfig, params: VqcParams, x) -> float:
    """Model output for one scaled input vector."""
    return float(predict_batch(config, params, np.asarray(x, dtype=np.float64)[None, :])[0])


def gradient_batch(config: VqcConfig, params: VqcParams, X, upstream) -> VqcParams:
    """Exact gradients summed over a batch, weighted per sample by ``upstream``.

    Returns a ``VqcParams`` holding d(sum_i upstream_i * f(x_i))/d(theta) for
    every trainable group.  Computed by one forward pass and one adjoint
    (reverse) sweep that walks the gate list backwards, undoing each gate on
    both the state and the measurement-propagated costate; each rotation
    contributes Im(<costate| P |state>) with P its generating Pauli.
    """
    X = _check_inputs(config, X)
    _check_params(config, params)
    upstream = np.asarray(upstream, dtype=np.float64).ravel()
    if upstream.shape != (X.shape[0],):
        raise ValueError(f"expected {X.shape[0]} upstream values, got {upstream.shape}")
    circuit = build_circuit(config)
    n = circuit.n_qubits
    circ_params = np.asarray(params.circuit, dtype=np.float64)
    weights = np.asarray(params.encoding, dtype=np.float64)

    psi = _forward(circuit, circ_params, weights, X)
    zq = _z_expectations(psi, n)

    coeffs = _output_coeffs(config, params)
    measure_diag = _sign_matrix(n) @ coeffs  # (dim,)
    lam = (psi * measure_diag) * upstream[:, None]

    grad_circuit = np.zeros(circuit.n_params)
    grad_encoding = np.zeros(circuit.n_weights)
    for gate in reversed(circuit.gates):
        kind = gate.kind
        if kind in sv.ROTATION_KINDS:
            axis = kind[1]
            qubit = gate.qubits[0]
            source = gate.angle
            angle = _gate_angle(source, circ_params, weights, X)
            if not isinstance(source, sv.Fixed):
                shifted = sv.pauli(psi, axis, qubit, n)
                imvals = np.sum(np.conj(lam) * shifted, axis=-1).imag
                if isinstance(source, Param):
                    grad_circuit[source.index] += imvals.sum()
                else:
                    grad_encoding[source.weight_index] += imvals @ X[:, source.feature]
            psi = sv.rotate(psi, axis, qubit, -angle, n)
            lam = sv.rotate(lam, axis, qubit, -angle, n)
        else:
            # H, CZ and CNOT are self-inverse
            psi = sv.apply_resolved(psi, gate, None, n)
            lam = sv.apply_resolved(lam, gate, None, n)

    grad = VqcParams(circuit=grad_circuit, encoding=grad_encoding)
    if config.output_scaling:
        grad.output_weights = zq.T @ upstream
        grad.output_bias = float(upstream.sum())
    flat = flatten_params(config, grad)
    bad = np.flatnonzero(~np.isfinite(flat))
    if bad.size:
        raise NumericError(f"non-finite gradient at flat index {int(bad[0])}")
    return grad


def gradient(config: VqcConfig, params: VqcParams, x, upstream: float = 1.0) -> VqcParams:
    """Exact gradient of ``upstream * f(x)`` for one input vector."""
    return gradient_batch(config, params, np.asarray(x, dtype=np.float64)[None, :], [upstream])


def parameter_shift(config: VqcConfig, params: VqcParams, x, index: int) -> float:
    """d f / d circuit_params[index] via (f(+pi/2) - f(-pi/2)) / 2."""
    circ = np.asarray(params.circuit, dtype=np.float64)
    if not 0 <= index < circ.shape[0]:
        raise ValueError(f"circuit parameter index {index} out of range")
    plus = circ.copy()
    plus[index] += _HALF_PI
    minus = circ.copy()
    minus[index] -= _HALF_PI
    f_plus = predict(config, replace_circuit(params, plus), x)
    f_minus = predict(config, replace_circuit(params, minus), x)
    return 0.5 * (f_plus - f_minus)


def parameter_shift_all(config: VqcConfig, params: VqcParams, x) -> np.ndarray:
    """Parameter-shift derivative for every circuit angle."""
    return np.array([parameter_shift(config, params, x, i) for i in range(len(params.circuit))])


def replace_circuit(params: VqcParams, circuit: np.ndarray) -> VqcParams:
    return VqcParams(
        circuit=circuit,
        encoding=params.encoding,
        output_weights=params.output_weights,
        output_bias=params.output_bias,
    )


def flatten_params(config: VqcConfig, params: VqcParams) -> np.ndarray:
    """Concatenate [circuit | encoding | output weights | bias] into one vector."""
    parts = [np.asarray(params.circuit, float).ravel(), np.asarray(params.encoding, float).ravel()]
    if config.output_scaling:
        parts.append(np.asarray(params.output_weights, float).ravel())
        parts.append(np.array([params.output_bias], dtype=np.float64))
    return np.concatenate(parts) if parts else np.zeros(0)


def unflatten_params(config: VqcConfig, flat: np.ndarray) -> VqcParams:
    flat = np.asarray(flat, dtype=np.float64).ravel()
    if flat.shape != (count_params(config),):
        raise ValueError(f"expected {count_params(config)} flat values, got {flat.shape[0]}")
    circuit = build_circuit(config)
    a = circuit.n_params
    b = a + circuit.n_weights
    if config.output_scaling:
        c = b + config.n_qubits
        return VqcParams(
            circuit=flat[:a].copy(),
            encoding=flat[a:b].copy(),
            output_weights=flat[b:c].copy(),
            output_bias=float(flat[c]),
        )
    return VqcParams(circuit=flat[:a].copy(), encoding=flat[a:b].copy())


class VqcModel:
    """A config plus its current parameters, with a flat-vector view for training."""

    kind = "vqc"

    def __init__(self, config: VqcConfig, params: VqcParams):
        self.config = config
        self.params = params
        _check_params(config, params)

    @classmethod
    def initialize(cls, config: VqcConfig, seed: int = 0) -> "VqcModel":
        return cls(config, init_params(config, np.random.default_rng(seed)))

    @property
    def n_params(self) -> int:
        return count_params(self.config)

    def predict(self, x) -> float:
        return predict(self.config, self.params, x)

    def predict_batch(self, X) -> np.ndarray:
        return predict_batch(self.config, self.params, X)

    def gradient_flat_batch(self, X, upstream) -> np.ndarray:
        grad = gradient_batch(self.config, self.params, X, upstream)
        return flatten_params(self.config, grad)

    def get_flat(self) -> np.ndarray:
        return flatten_params(self.config, self.params)

    def set_flat(self, flat: np.ndarray) -> None:
        self.params = unflatten_params(self.config, flat)
