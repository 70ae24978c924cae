"""Dense state-vector engine.

Qubit ``q`` is bit ``q`` of the amplitude index (qubit 0 is the least
significant bit). Measurement outcome 0 always means eigenvalue +1.
X is measured as H, Z-measure, H; Y as S-dagger, H, Z-measure, H, S, which
leaves the measured qubit in the eigenstate that was observed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .rng import PRUNE_TOL, as_stream

if TYPE_CHECKING:
    from .net import Partition

DEFAULT_MAX_QUBITS = 16
NORM_TOL = 1e-12
TRACE_TOL = 1e-10

SQRT_HALF = 1.0 / np.sqrt(2.0)


class CapacityError(ValueError):
    """Requested register exceeds the dense-simulation limit."""


class ShapeError(ValueError):
    """Operands act on incompatible numbers of qubits."""


class Basis(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


class Gate(str, Enum):
    H = "H"
    Z = "Z"
    S = "S"
    S_DAGGER = "S_dagger"


GATE_MATRICES = {
    Gate.H: np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF,
    Gate.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    Gate.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    Gate.S_DAGGER: np.array([[1, 0], [0, -1j]], dtype=complex),
}
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class MeasurementRecord:
    qubit_index: int
    basis: Basis
    outcome: int


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("a state needs at least one qubit")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 2**self.n_qubits:
            raise ShapeError(
                f"{amps.shape[0]} amplitudes do not describe {self.n_qubits} qubits"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.shape[0])))
        return cls(n, amps)

    @classmethod
    def basis_state(cls, bits: Sequence[int]) -> "StateVector":
        """Computational basis state; ``bits[q]`` is the value of qubit ``q``."""
        n = len(bits)
        amps = np.zeros(2**n, dtype=complex)
        amps[sum(int(b) << q for q, b in enumerate(bits))] = 1.0
        return cls(n, amps)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "StateVector":
        """Inverse of :meth:`to_pairs`."""
        arr = np.asarray(list(pairs), dtype=float)
        return cls.from_amplitudes(arr[:, 0] + 1j * arr[:, 1])

    def to_pairs(self) -> list[tuple[float, float]]:
        """(real, imaginary) pairs in index order."""
        return [(float(a.real), float(a.imag)) for a in self.amplitudes]

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits})"


def _check_capacity(n: int, max_qubits: int) -> None:
    if n < 1:
        raise ValueError(f"need at least one qubit, got {n}")
    if n > max_qubits:
        raise CapacityError(f"{n} qubits exceeds the configured maximum of {max_qubits}")


def _check_index(state: StateVector, q: int) -> None:
    if not 0 <= q < state.n_qubits:
        raise IndexError(f"qubit {q} out of range for {state.n_qubits} qubits")


def prepare_ghz(n: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    _check_capacity(n, max_qubits)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = SQRT_HALF
    return StateVector(n, amps)


def tensor(*states: StateVector) -> StateVector:
    """Product state; the first factor occupies the lowest qubit indices."""
    amps = np.ones(1, dtype=complex)
    for s in states:
        amps = np.kron(s.amplitudes, amps)
    return StateVector(sum(s.n_qubits for s in states), amps)


def prepare_adversarial_state(
    n: int,
    partition: "Partition",
    psi: StateVector,
    phi: StateVector,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> StateVector:
    """Build (|0..0>|psi> + |1..1>|phi>)/sqrt(2) with psi, phi on the colluders.

    Qubit ``j`` of ``psi``/``phi`` sits on the ``j``-th smallest colluder id.
    """
    _check_capacity(n, max_qubits)
    colluders = sorted(partition.colluders)
    k = len(colluders)
    if k == 0:
        raise ShapeError("colluder states need at least one colluder")
    for s in (psi, phi):
        if s.n_qubits != k:
            raise ShapeError(f"colluder state has {s.n_qubits} qubits, expected {k}")
    honest_mask = sum(1 << q for q in range(n) if q not in partition.colluders)
    amps = np.zeros(2**n, dtype=complex)
    for c_idx in range(2**k):
        idx = sum(1 << colluders[j] for j in range(k) if (c_idx >> j) & 1)
        amps[idx] += psi.amplitudes[c_idx]
        amps[idx | honest_mask] += phi.amplitudes[c_idx]
    amps /= np.sqrt(np.vdot(amps, amps).real)
    return StateVector(n, amps)


def _apply_1q(amps: np.ndarray, n: int, q: int, u: np.ndarray) -> np.ndarray:
    a = amps.reshape(2 ** (n - 1 - q), 2, 2**q)
    out = np.empty_like(a)
    a0, a1 = a[:, 0, :], a[:, 1, :]
    if u[0, 1] == 0 and u[1, 0] == 0:
        out[:, 0, :] = u[0, 0] * a0
        out[:, 1, :] = u[1, 1] * a1
    else:
        out[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
        out[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
    return out.reshape(-1)


def apply_gate(state: StateVector, qubit_index: int, gate: Gate | str) -> StateVector:
    _check_index(state, qubit_index)
    u = GATE_MATRICES[Gate(gate)]
    return StateVector(state.n_qubits, _apply_1q(state.amplitudes, state.n_qubits, qubit_index, u))


def apply_unitary(state: StateVector, matrix, qubits: Sequence[int]) -> StateVector:
    """Apply a ``2^k x 2^k`` unitary; ``qubits[0]`` is its least significant qubit."""
    n = state.n_qubits
    qubits = list(qubits)
    for q in qubits:
        _check_index(state, q)
    if len(set(qubits)) != len(qubits):
        raise ValueError("repeated qubit in unitary target")
    k = len(qubits)
    u = np.asarray(matrix, dtype=complex)
    if u.shape != (2**k, 2**k):
        raise ShapeError(f"unitary of shape {u.shape} cannot act on {k} qubits")
    if not np.allclose(u.conj().T @ u, np.eye(2**k), atol=1e-10):
        raise ValueError("matrix is not unitary")
    psi = state.amplitudes.reshape([2] * n)
    # tensor axis 0 is the most significant qubit
    axes = [n - 1 - q for q in reversed(qubits)]
    ut = u.reshape([2] * (2 * k))
    out = np.tensordot(ut, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return StateVector(n, out.reshape(-1))


def _rotate_in(amps, n, q, basis):
    if basis is Basis.Y:
        amps = _apply_1q(amps, n, q, GATE_MATRICES[Gate.S_DAGGER])
    if basis is not Basis.Z:
        amps = _apply_1q(amps, n, q, GATE_MATRICES[Gate.H])
    return amps


def _rotate_out(amps, n, q, basis):
    if basis is not Basis.Z:
        amps = _apply_1q(amps, n, q, GATE_MATRICES[Gate.H])
    if basis is Basis.Y:
        amps = _apply_1q(amps, n, q, GATE_MATRICES[Gate.S])
    return amps


def _split(state: StateVector, qubit_index: int, basis: Basis):
    """Rotated amplitudes as (high, bit, low) plus the two outcome probabilities."""
    _check_index(state, qubit_index)
    n, q = state.n_qubits, qubit_index
    a = _rotate_in(state.amplitudes, n, q, basis).reshape(2 ** (n - 1 - q), 2, 2**q)
    w = (a.real**2 + a.imag**2).sum(axis=(0, 2))
    return a, float(w[0]), float(w[1])


def _collapse(state, q, basis, a, outcome, p) -> StateVector:
    out = np.zeros_like(a)
    out[:, outcome, :] = a[:, outcome, :] / np.sqrt(p)
    return StateVector(state.n_qubits, _rotate_out(out.reshape(-1), state.n_qubits, q, basis))


def outcome_probabilities(state: StateVector, qubit_index: int, basis: Basis | str) -> tuple[float, float]:
    _, p0, p1 = _split(state, qubit_index, Basis(basis))
    return p0, p1


def project(
    state: StateVector, qubit_index: int, basis: Basis | str, outcome: int
) -> tuple[float, StateVector | None]:
    """Probability of ``outcome`` and the renormalized post-measurement state."""
    basis = Basis(basis)
    a, p0, p1 = _split(state, qubit_index, basis)
    p = p1 if outcome else p0
    if p <= PRUNE_TOL:
        return p, None
    return p, _collapse(state, qubit_index, basis, a, outcome, p)


def measure(
    state: StateVector, qubit_index: int, basis: Basis | str, rng
) -> tuple[MeasurementRecord, StateVector]:
    basis = Basis(basis)
    a, p0, p1 = _split(state, qubit_index, basis)
    outcome = as_stream(rng).born(p0)
    post = _collapse(state, qubit_index, basis, a, outcome, p1 if outcome else p0)
    return MeasurementRecord(qubit_index, basis, outcome), post


def reduced_density(
    state: StateVector, qubit_subset: Iterable[int], max_qubits: int = DEFAULT_MAX_QUBITS
) -> np.ndarray:
    """Partial trace onto ``qubit_subset``, ordered little-endian by ascending qubit."""
    keep = sorted(set(qubit_subset))
    if not keep:
        raise ValueError("qubit subset is empty")
    for q in keep:
        _check_index(state, q)
    if len(keep) > max_qubits:
        raise CapacityError(f"{len(keep)}-qubit density matrix exceeds the limit of {max_qubits}")
    n = state.n_qubits
    psi = state.amplitudes.reshape([2] * n)
    keep_axes = {n - 1 - q for q in keep}
    traced = [ax for ax in range(n) if ax not in keep_axes]
    rho = np.tensordot(psi, psi.conj(), axes=(traced, traced))
    d = 2 ** len(keep)
    return rho.reshape(d, d)


def fidelity(state_a, state_b) -> float:
    """|<a|b>|^2 for two states; <a|rho|a> when one side is a density matrix."""
    if isinstance(state_a, StateVector) and isinstance(state_b, StateVector):
        if state_a.n_qubits != state_b.n_qubits:
            raise ShapeError("fidelity between states of different size")
        return float(abs(np.vdot(state_a.amplitudes, state_b.amplitudes)) ** 2)
    if not isinstance(state_a, StateVector):
        state_a, state_b = state_b, state_a
    rho = np.asarray(state_b)
    v = state_a.amplitudes
    if rho.shape != (v.shape[0], v.shape[0]):
        raise ShapeError("fidelity between state and density matrix of different size")
    return float(np.vdot(v, rho @ v).real)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = np.asarray(rho) - np.asarray(sigma)
    return float(0.5 * np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


def restrict(state: StateVector, qubits: Sequence[int]) -> StateVector:
    """Pure state on ``qubits`` when they are in a product with the rest.

    Raises ValueError if the reduced state is mixed.
    """
    rho = reduced_density(state, qubits)
    w, v = np.linalg.eigh(rho)
    if w[-1] < 1 - 1e-9:
        raise ValueError("subsystem is entangled with the rest of the register")
    return StateVector.from_amplitudes(v[:, -1])
