"""Declarative adversaries: tampered sources and deviating colluders.

Colluders are non-participants. They may inject a correlated state at the
source, apply a unitary to their own qubits before AME, skip their AME
measurement and announce a bit of their choosing, or stay silent (which makes
the protocol abort).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .net import ModelError, Partition
from .qsim import (
    DEFAULT_MAX_QUBITS,
    GATE_MATRICES,
    PAULI,
    Gate,
    ShapeError,
    StateVector,
    apply_unitary,
    prepare_adversarial_state,
    prepare_ghz,
)

SOURCES = ("honest", "eq2", "eq2-orthogonal", "eq2-equal")
SKIP_POLICIES = ("zero", "one", "random")


@dataclass(frozen=True)
class Behavior:
    """What a colluder does in AME: ``measure``, ``skip`` or ``withhold``."""

    kind: str = "measure"
    policy: str = "random"

    def __post_init__(self):
        if self.kind not in ("measure", "skip", "withhold"):
            raise ValueError(f"unknown colluder behavior {self.kind!r}")
        if self.policy not in SKIP_POLICIES:
            raise ValueError(f"unknown announcement policy {self.policy!r}")

    @classmethod
    def parse(cls, text: str) -> "Behavior":
        """``measure``, ``withhold``, or ``skip-zero`` / ``skip-one`` / ``skip-random``."""
        kind, _, policy = text.strip().partition("-")
        return cls(kind, policy or "random")

    def announce(self, rng) -> int | None:
        if self.kind == "withhold":
            return None
        if self.policy == "random":
            return rng.bit()
        return 1 if self.policy == "one" else 0

    def __str__(self):
        return self.kind if self.kind != "skip" else f"skip-{self.policy}"


MEASURE = Behavior()
# colluders holding an injected share keep it intact unless told otherwise
HOLD = Behavior("skip", "zero")


@dataclass(frozen=True)
class UnitaryAction:
    matrix: np.ndarray
    qubits: tuple[int, ...]

    @classmethod
    def gate(cls, name: str, qubit: int) -> "UnitaryAction":
        if name in PAULI:
            return cls(PAULI[name], (qubit,))
        return cls(GATE_MATRICES[Gate(name)], (qubit,))


@dataclass
class AdversarySpec:
    source: str = "honest"
    psi: StateVector | None = None
    phi: StateVector | None = None
    behavior: Behavior | None = None
    overrides: Mapping[int, Behavior] = field(default_factory=dict)
    unitaries: Sequence[UnitaryAction] = ()
    colluders: frozenset[int] | None = None

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source mode {self.source!r}")
        if self.source == "eq2" and (self.psi is None or self.phi is None):
            raise ValueError("eq2 source needs both psi and phi")
        if self.colluders is not None:
            self.colluders = frozenset(self.colluders)
        if self.behavior is None:
            self.behavior = MEASURE if self.source == "honest" else HOLD

    @property
    def is_honest(self) -> bool:
        return (
            self.source == "honest"
            and self.behavior == MEASURE
            and all(b == MEASURE for b in self.overrides.values())
            and not self.unitaries
        )

    def behavior_for(self, party: int) -> Behavior:
        return self.overrides.get(party, self.behavior)

    def silent(self, partition: Partition) -> frozenset[int]:
        return frozenset(c for c in partition.colluders if self.behavior_for(c).kind == "withhold")

    def validate(self, partition: Partition) -> None:
        if self.colluders is not None and self.colluders != partition.colluders:
            raise ModelError("adversary colluder set disagrees with the partition")
        bad = set(self.overrides) - partition.colluders
        if bad:
            raise ModelError(f"behavior overrides for non-colluders {sorted(bad)}")
        for u in self.unitaries:
            if not set(u.qubits) <= partition.colluders:
                raise ModelError(f"unitary on {u.qubits} touches non-colluder qubits")
        if self.source != "honest":
            k = len(partition.colluders)
            if k == 0:
                raise ModelError("a correlated source injection needs colluders")
            if self.source == "eq2":
                for s in (self.psi, self.phi):
                    if s.n_qubits != k:
                        raise ShapeError(f"colluder state on {s.n_qubits} qubits, colluders hold {k}")

    def colluder_states(self, k: int) -> tuple[StateVector, StateVector]:
        if self.source == "eq2":
            return self.psi, self.phi
        zero = StateVector.basis_state([0] * k)
        if self.source == "eq2-equal":
            return zero, zero
        return zero, StateVector.basis_state([1] * k)


HONEST = AdversarySpec()


def emit_source_state(
    spec: AdversarySpec | None, partition: Partition, max_qubits: int = DEFAULT_MAX_QUBITS
) -> StateVector:
    spec = spec or HONEST
    if spec.source == "honest":
        return prepare_ghz(partition.n, max_qubits)
    spec.validate(partition)
    psi, phi = spec.colluder_states(len(partition.colluders))
    return prepare_adversarial_state(partition.n, partition, psi, phi, max_qubits)


def apply_colluder_actions(state: StateVector, spec: AdversarySpec | None, partition: Partition) -> StateVector:
    """Apply the colluders' unitaries; skipping is read later via ``behavior_for``."""
    spec = spec or HONEST
    for u in spec.unitaries:
        if not set(u.qubits) <= partition.colluders:
            raise ModelError(f"unitary on {u.qubits} touches non-colluder qubits")
        state = apply_unitary(state, u.matrix, u.qubits)
    return state
