"""Dense statevector simulation of few-qubit circuits.

The register convention places qubit 0 at the most significant bit of the
basis index, so a two-qubit register orders amplitudes as |00>, |01>, |10>,
|11>. Rotations follow RX(t) = exp(-i t X / 2) (likewise RY, RZ); under this
convention a single RX(x) applied to |0> yields <Z> = cos(x).

Two layers live here:

* array kernels (``rotate``, ``hadamard``, ``controlled_z``, ...) act on raw
  complex amplitude arrays whose last axis enumerates basis states.  Leading
  axes broadcast, so model code can push a whole batch of inputs through a
  circuit in one pass.  Rotation angles may be scalars or arrays matching the
  leading axes.
* a value-typed API (``StateVector``, ``init_zero``, ``apply_gate``,
  ``run_circuit``) for single states.  Gate application never mutates its
  input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

MAX_QUBITS = 10

ROTATION_KINDS = ("RX", "RY", "RZ")
GATE_KINDS = ROTATION_KINDS + ("H", "CZ", "CNOT")

_SQRT_HALF = 1.0 / np.sqrt(2.0)


# --------------------------------------------------------------------------
# angle sources
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Fixed:
    """Rotation angle baked into the circuit."""

    value: float


@dataclass(frozen=True)
class Param:
    """Rotation angle read from the trainable parameter vector."""

    index: int


@dataclass(frozen=True)
class Encoding:
    """Rotation angle = weights[weight_index] * inputs[feature]."""

    feature: int
    weight_index: int


AngleSource = Union[Fixed, Param, Encoding]


@dataclass(frozen=True)
class GateOp:
    """One gate: a kind, target qubit(s), and an angle source for rotations."""

    kind: str
    qubits: tuple[int, ...]
    angle: AngleSource | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind in ROTATION_KINDS:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.kind} acts on exactly one qubit")
            if self.angle is None:
                raise ValueError(f"{self.kind} requires an angle source")
        elif self.kind == "H":
            if len(self.qubits) != 1:
                raise ValueError("H acts on exactly one qubit")
            if self.angle is not None:
                raise ValueError("H takes no angle")
        else:  # CZ, CNOT
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{self.kind} acts on two distinct qubits")
            if self.angle is not None:
                raise ValueError(f"{self.kind} takes no angle")


def rx(qubit: int, angle: AngleSource) -> GateOp:
    return GateOp("RX", (qubit,), angle)


def ry(qubit: int, angle: AngleSource) -> GateOp:
    return GateOp("RY", (qubit,), angle)


def rz(qubit: int, angle: AngleSource) -> GateOp:
    return GateOp("RZ", (qubit,), angle)


def h(qubit: int) -> GateOp:
    return GateOp("H", (qubit,))


def cz(qubit_a: int, qubit_b: int) -> GateOp:
    return GateOp("CZ", (qubit_a, qubit_b))


def cnot(control: int, target: int) -> GateOp:
    return GateOp("CNOT", (control, target))


@dataclass(frozen=True)
class CircuitSpec:
    """An ordered gate list over a fixed register.

    Parameter, feature, and encoding-weight slot counts are derived from the
    gates (one past the highest referenced index); ``n_features`` may also be
    declared explicitly and is kept if larger than the derived value.
    """

    n_qubits: int
    gates: tuple[GateOp, ...]
    n_features: int = 0
    n_params: int = field(init=False, default=0)
    n_weights: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        if not isinstance(self.n_qubits, int) or not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be an int in [1, {MAX_QUBITS}], got {self.n_qubits!r}")
        object.__setattr__(self, "gates", tuple(self.gates))
        n_params = 0
        n_weights = 0
        n_features = int(self.n_features)
        if n_features < 0:
            raise ValueError("n_features must be non-negative")
        for gate in self.gates:
            if not isinstance(gate, GateOp):
                raise ValueError(f"gates must be GateOp instances, got {type(gate).__name__}")
            for q in gate.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate {gate.kind} addresses qubit {q} outside register of size {self.n_qubits}")
            src = gate.angle
            if isinstance(src, Param):
                if src.index < 0:
                    raise ValueError("parameter index must be non-negative")
                n_params = max(n_params, src.index + 1)
            elif isinstance(src, Encoding):
                if src.feature < 0 or src.weight_index < 0:
                    raise ValueError("encoding indices must be non-negative")
                n_weights = max(n_weights, src.weight_index + 1)
                n_features = max(n_features, src.feature + 1)
        object.__setattr__(self, "n_params", n_params)
        object.__setattr__(self, "n_weights", n_weights)
        object.__setattr__(self, "n_features", n_features)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the computational basis of ``n_qubits``."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


# --------------------------------------------------------------------------
# cached index tables
# --------------------------------------------------------------------------

def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _bits(n_qubits: int, qubit: int) -> np.ndarray:
    """Bit value of ``qubit`` for each basis index (qubit 0 = MSB)."""
    idx = np.arange(1 << n_qubits)
    return _readonly((idx >> (n_qubits - 1 - qubit)) & 1)


@lru_cache(maxsize=None)
def z_signs(n_qubits: int, qubit: int) -> np.ndarray:
    """Pauli-Z eigenvalue (+1/-1) of ``qubit`` for each basis index."""
    return _readonly(1.0 - 2.0 * _bits(n_qubits, qubit))


@lru_cache(maxsize=None)
def _flip_perm(n_qubits: int, qubit: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits)
    return _readonly(idx ^ (1 << (n_qubits - 1 - qubit)))


@lru_cache(maxsize=None)
def _cnot_perm(n_qubits: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits)
    cbit = (idx >> (n_qubits - 1 - control)) & 1
    return _readonly(idx ^ (cbit << (n_qubits - 1 - target)))


@lru_cache(maxsize=None)
def _cz_signs(n_qubits: int, qubit_a: int, qubit_b: int) -> np.ndarray:
    both = _bits(n_qubits, qubit_a) & _bits(n_qubits, qubit_b)
    return _readonly(1.0 - 2.0 * both)


# --------------------------------------------------------------------------
# array kernels (last axis = basis states, leading axes broadcast)
# --------------------------------------------------------------------------

def zero_amplitudes(n_qubits: int, batch_shape: tuple[int, ...] = ()) -> np.ndarray:
    amps = np.zeros(batch_shape + (1 << n_qubits,), dtype=np.complex128)
    amps[..., 0] = 1.0
    return amps


def _split(amps: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    lead = amps.shape[:-1]
    return amps.reshape(lead + (1 << qubit, 2, 1 << (n_qubits - 1 - qubit)))


def _halves(angle) -> tuple[np.ndarray, np.ndarray]:
    half = 0.5 * np.asarray(angle, dtype=np.float64)
    c = np.cos(half)
    s = np.sin(half)
    if half.ndim:
        # align batch axes left of the (block, block) trailing pair
        shape = half.shape + (1, 1)
        c = c.reshape(shape)
        s = s.reshape(shape)
    return c, s


def rotate(amps: np.ndarray, axis: str, qubit: int, angle, n_qubits: int) -> np.ndarray:
    """Apply RX/RY/RZ (axis 'X'/'Y'/'Z') by ``angle`` to ``qubit``."""
    c, s = _halves(angle)
    src = _split(amps, qubit, n_qubits)
    a0 = src[..., 0, :]
    a1 = src[..., 1, :]
    out = np.empty_like(src)
    if axis == "X":
        m = -1j * s  # fold the phase into the angle-shaped factor, not the amplitudes
        out[..., 0, :] = c * a0 + m * a1
        out[..., 1, :] = m * a0 + c * a1
    elif axis == "Y":
        out[..., 0, :] = c * a0 - s * a1
        out[..., 1, :] = s * a0 + c * a1
    elif axis == "Z":
        phase = c - 1j * s  # exp(-i angle / 2)
        out[..., 0, :] = phase * a0
        out[..., 1, :] = np.conj(phase) * a1
    else:
        raise ValueError(f"unknown rotation axis {axis!r}")
    return out.reshape(amps.shape)


def hadamard(amps: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    src = _split(amps, qubit, n_qubits)
    a0 = src[..., 0, :]
    a1 = src[..., 1, :]
    out = np.empty_like(src)
    out[..., 0, :] = (a0 + a1) * _SQRT_HALF
    out[..., 1, :] = (a0 - a1) * _SQRT_HALF
    return out.reshape(amps.shape)


def controlled_z(amps: np.ndarray, qubit_a: int, qubit_b: int, n_qubits: int) -> np.ndarray:
    return amps * _cz_signs(n_qubits, qubit_a, qubit_b)


def controlled_not(amps: np.ndarray, control: int, target: int, n_qubits: int) -> np.ndarray:
    return amps[..., _cnot_perm(n_qubits, control, target)]


def pauli(amps: np.ndarray, axis: str, qubit: int, n_qubits: int) -> np.ndarray:
    """Apply a bare Pauli operator (generator of the matching rotation)."""
    if axis == "Z":
        return amps * z_signs(n_qubits, qubit)
    flipped = amps[..., _flip_perm(n_qubits, qubit)]
    if axis == "X":
        return flipped
    if axis == "Y":
        # Y|0> = i|1>, Y|1> = -i|0>
        phase = np.where(_bits(n_qubits, qubit) == 1, 1j, -1j)
        return phase * flipped
    raise ValueError(f"unknown Pauli axis {axis!r}")


def expectation_z_array(amps: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    probs = amps.real**2 + amps.imag**2
    return probs @ z_signs(n_qubits, qubit)


def apply_resolved(amps: np.ndarray, gate: GateOp, angle, n_qubits: int) -> np.ndarray:
    """Apply one gate whose angle (if any) is already a number or batch array."""
    kind = gate.kind
    if kind in ROTATION_KINDS:
        return rotate(amps, kind[1], gate.qubits[0], angle, n_qubits)
    if kind == "H":
        return hadamard(amps, gate.qubits[0], n_qubits)
    if kind == "CZ":
        return controlled_z(amps, gate.qubits[0], gate.qubits[1], n_qubits)
    return controlled_not(amps, gate.qubits[0], gate.qubits[1], n_qubits)


# --------------------------------------------------------------------------
# value-typed API
# --------------------------------------------------------------------------

def init_zero(n_qubits: int) -> StateVector:
    """The all-zeros computational basis state |0...0>."""
    if not isinstance(n_qubits, int) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be an int in [1, {MAX_QUBITS}], got {n_qubits!r}")
    return StateVector(n_qubits, zero_amplitudes(n_qubits))


def basis_state(n_qubits: int, index: int) -> StateVector:
    """The computational basis state with the given index (qubit 0 = MSB)."""
    if not 0 <= index < (1 << n_qubits):
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def apply_gate(state: StateVector, gate: GateOp, angle: float | None = None) -> StateVector:
    """Apply one gate, returning a new state.

    Rotations need a concrete ``angle`` unless the gate carries a ``Fixed``
    source; non-rotations must not receive one.
    """
    for q in gate.qubits:
        if q >= state.n_qubits:
            raise ValueError(f"gate {gate.kind} addresses qubit {q} outside register of size {state.n_qubits}")
    if gate.kind in ROTATION_KINDS:
        if angle is None:
            if isinstance(gate.angle, Fixed):
                angle = gate.angle.value
            else:
                raise ValueError(f"{gate.kind} application requires an angle")
        angle = float(angle)
    elif angle is not None:
        raise ValueError(f"{gate.kind} takes no angle")
    return StateVector(state.n_qubits, apply_resolved(state.amplitudes, gate, angle, state.n_qubits))


def expectation_z(state: StateVector, qubit: int) -> float:
    """<Z> on one qubit: sum over basis states of (+1/-1) |amplitude|^2."""
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(f"qubit {qubit} out of range for register of size {state.n_qubits}")
    return float(expectation_z_array(state.amplitudes, qubit, state.n_qubits))


def resolve_angle(source: AngleSource, params, inputs, weights) -> float:
    if isinstance(source, Fixed):
        return float(source.value)
    if isinstance(source, Param):
        return float(params[source.index])
    if isinstance(source, Encoding):
        return float(weights[source.weight_index]) * float(inputs[source.feature])
    raise ValueError(f"unknown angle source {source!r}")


def run_circuit(
    circuit: CircuitSpec,
    params,
    inputs=None,
    encoding_weights=None,
) -> StateVector:
    """Run a circuit from |0...0>, resolving every angle source.

    ``params`` must have exactly ``circuit.n_params`` entries and ``inputs``
    exactly ``circuit.n_features``.  ``encoding_weights`` defaults to all
    ones, i.e. the encoded angle is the raw feature value.
    """
    params = np.asarray(params, dtype=np.float64).ravel() if params is not None else np.zeros(0)
    if params.shape != (circuit.n_params,):
        raise ValueError(f"expected {circuit.n_params} parameters, got {params.shape[0]}")
    if inputs is None:
        inputs = np.zeros(0)
    inputs = np.asarray(inputs, dtype=np.float64).ravel()
    if inputs.shape != (circuit.n_features,):
        raise ValueError(f"expected {circuit.n_features} input features, got {inputs.shape[0]}")
    if encoding_weights is None:
        encoding_weights = np.ones(circuit.n_weights)
    encoding_weights = np.asarray(encoding_weights, dtype=np.float64).ravel()
    if encoding_weights.shape != (circuit.n_weights,):
        raise ValueError(f"expected {circuit.n_weights} encoding weights, got {encoding_weights.shape[0]}")

    amps = zero_amplitudes(circuit.n_qubits)
    for gate in circuit.gates:
        angle = None
        if gate.kind in ROTATION_KINDS:
            angle = resolve_angle(gate.angle, params, inputs, encoding_weights)
        amps = apply_resolved(amps, gate, angle, circuit.n_qubits)
    return StateVector(circuit.n_qubits, amps)
