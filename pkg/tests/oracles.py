"""Independent reference implementations used to cross-check the package.

Everything here is written the slow, obvious way: full 2^n x 2^n gate
matrices built from kron products and projectors, pure-Python network
forward passes, and central finite differences.  Nothing imports the
kernels under test beyond the data types needed to read a circuit.
"""

from __future__ import annotations

import numpy as np

from steerlab.statevector import Encoding, Fixed, Param

_SQ2 = 1.0 / np.sqrt(2.0)

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
_P0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
_P1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)

PAULI = {"X": _X, "Y": _Y, "Z": _Z}


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """exp(-i * angle * P / 2) for P in {X, Y, Z}, via the exact 2x2 form."""
    c = np.cos(angle / 2.0)
    s = np.sin(angle / 2.0)
    return c * _I2 - 1.0j * s * PAULI[axis]


def embed_single(matrix: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Lift a 2x2 operator onto one qubit of the register (qubit 0 = MSB)."""
    full = np.eye(1, dtype=complex)
    for q in range(n_qubits):
        full = np.kron(full, matrix if q == qubit else _I2)
    return full


def cnot_matrix(control: int, target: int, n_qubits: int) -> np.ndarray:
    return embed_single(_P0, control, n_qubits) + embed_single(_P1, control, n_qubits) @ embed_single(
        _X, target, n_qubits
    )


def cz_matrix(qubit_a: int, qubit_b: int, n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    return np.eye(dim, dtype=complex) - 2.0 * embed_single(_P1, qubit_a, n_qubits) @ embed_single(
        _P1, qubit_b, n_qubits
    )


def gate_matrix(gate, angle: float | None, n_qubits: int) -> np.ndarray:
    if gate.kind in ("RX", "RY", "RZ"):
        return embed_single(rotation_matrix(gate.kind[1], angle), gate.qubits[0], n_qubits)
    if gate.kind == "H":
        return embed_single(_H, gate.qubits[0], n_qubits)
    if gate.kind == "CZ":
        return cz_matrix(gate.qubits[0], gate.qubits[1], n_qubits)
    if gate.kind == "CNOT":
        return cnot_matrix(gate.qubits[0], gate.qubits[1], n_qubits)
    raise ValueError(gate.kind)


def resolve(source, params, inputs, weights) -> float:
    if isinstance(source, Fixed):
        return float(source.value)
    if isinstance(source, Param):
        return float(params[source.index])
    if isinstance(source, Encoding):
        return float(weights[source.weight_index]) * float(inputs[source.feature])
    raise ValueError(source)


def run_circuit_matrix(circuit, params=(), inputs=(), weights=None) -> np.ndarray:
    """Multiply full gate matrices onto |0...0> and return the amplitudes."""
    n = circuit.n_qubits
    if weights is None:
        weights = np.ones(circuit.n_weights)
    state = np.zeros(1 << n, dtype=complex)
    state[0] = 1.0
    for gate in circuit.gates:
        angle = resolve(gate.angle, params, inputs, weights) if gate.angle is not None else None
        state = gate_matrix(gate, angle, n) @ state
    return state


def z_expectation_matrix(state: np.ndarray, qubit: int, n_qubits: int) -> float:
    op = embed_single(_Z, qubit, n_qubits)
    return float(np.real(np.conj(state) @ op @ state))


def mlp_forward_loops(weights, biases, x, activation) -> float:
    """Network forward pass with explicit Python loops, one input vector."""
    acts = {"relu": lambda v: max(v, 0.0), "tanh": np.tanh, "sin": np.sin}
    act = acts[activation]
    values = [float(v) for v in x]
    n_layers = len(weights)
    for layer, (w, b) in enumerate(zip(weights, biases)):
        nxt = []
        for j in range(w.shape[1]):
            total = float(b[j])
            for i in range(w.shape[0]):
                total += values[i] * float(w[i, j])
            nxt.append(total if layer == n_layers - 1 else float(act(total)))
        values = nxt
    assert len(values) == 1
    return values[0]


def central_diff(f, x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Per-coordinate central finite differences of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        hi = x.copy()
        lo = x.copy()
        hi.flat[i] += eps
        lo.flat[i] -= eps
        grad.flat[i] = (f(hi) - f(lo)) / (2.0 * eps)
    return grad
