"""Enumeration oracles for the quantum parts of the protocol.

Each oracle pairs exact branch enumeration of the protocol code with a
closed-form reference built from explicit tensor products, so the two sides
share no simulation code.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import combinations, product

import numpy as np

from .adversary import AdversarySpec, Behavior, emit_source_state
from .ame import run_ame
from .net import Network, Partition
from .qsim import PAULI, StateVector, fidelity, prepare_ghz
from .rng import enumerate_branches
from .verification import run_verification

EXACT_TOL = 1e-12


@dataclass
class OracleResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"oracle={self.name} result={'PASS' if self.passed else 'FAIL'} {self.detail}"


def kron_operator(paulis: dict[int, str], n: int) -> np.ndarray:
    """Dense operator with ``paulis[q]`` on qubit ``q`` and identity elsewhere."""
    # np.kron puts its first factor on the most significant qubit
    return reduce(np.kron, [PAULI[paulis.get(q, "I")] for q in reversed(range(n))])


def stabilizer_acceptance(rho: np.ndarray, participants: list[int], alice: int, n: int) -> float:
    """Closed-form acceptance probability of the X/Y check on density matrix ``rho``.

    Bobs pick bases uniformly and Alice completes the basis sum to even, so for
    Bob bits b the round accepts with probability (1 + (-1)^k <O_b>) / 2 where
    O_b is the product of the chosen Paulis and k half the basis sum.
    """
    bobs = [p for p in participants if p != alice]
    total = 0.0
    for bits in product((0, 1), repeat=len(bobs)):
        b0 = sum(bits) % 2
        ops = {p: "XY"[b] for p, b in zip(bobs, bits)}
        ops[alice] = "XY"[b0]
        k = (sum(bits) + b0) // 2
        expval = np.trace(rho @ kron_operator(ops, n)).real
        total += (1 + (-1) ** k * expval) / 2
    return total / 2 ** len(bobs)


def phase_law_state(partition: Partition, x: dict[int, int]) -> np.ndarray:
    """(|0..0> + (-1)^|x| |1..1>)/sqrt(2) on the participants, H|x_j> on each
    non-participant, built amplitude by amplitude."""
    n = partition.n
    part = sorted(partition.participants)
    sign = (-1) ** (sum(x.values()) % 2)
    amps = np.zeros(2**n, dtype=complex)
    for idx in range(2**n):
        bits = [(idx >> q) & 1 for q in range(n)]
        pbits = {bits[p] for p in part}
        if len(pbits) != 1:
            continue
        a = 1 / np.sqrt(2) * (sign if pbits == {1} else 1)
        for j, xj in x.items():
            a *= (-1) ** (xj * bits[j]) / np.sqrt(2)
        amps[idx] = a
    return amps


def acceptance_by_enumeration(partition: Partition, adversary: AdversarySpec | None = None, with_ame: bool = True):
    """Exact acceptance probability of one round, enumerating every branch."""

    def simulate(stream):
        net = Network(partition.n)
        state = emit_source_state(adversary, partition)
        if with_ame:
            state = run_ame(state, partition, adversary, net, stream).post_state
        return run_verification(state, partition, net, stream, adversary=adversary).accepted

    return sum(w * acc for w, acc in enumerate_branches(simulate, shuffles=False))


def verification_completeness(max_parties: int = 6) -> OracleResult:
    worst = 0.0
    for size in range(1, max_parties + 1):
        part = Partition.build(size, 0, range(1, size))
        p_enum = acceptance_by_enumeration(part, with_ame=False)
        ghz = prepare_ghz(size).amplitudes
        p_ref = stabilizer_acceptance(np.outer(ghz, ghz.conj()), list(range(size)), 0, size)
        worst = max(worst, abs(p_enum - 1), abs(p_ref - 1))
    return OracleResult(
        "verification-completeness", worst <= EXACT_TOL, f"sizes=1..{max_parties} max_deviation={worst:.3e}"
    )


def ame_phase_law(max_parties: int = 6) -> OracleResult:
    worst, branches = 0.0, 0
    for n in range(1, max_parties + 1):
        for alice in range(n):
            others = [p for p in range(n) if p != alice]
            for m in range(len(others) + 1):
                for bobs in combinations(others, m):
                    part = Partition.build(n, alice, bobs)

                    def simulate(stream, part=part):
                        return run_ame(prepare_ghz(part.n), part, None, Network(part.n), stream)

                    for _, res in enumerate_branches(simulate, shuffles=False):
                        ref = StateVector(n, phase_law_state(part, res.measured))
                        worst = max(worst, 1 - fidelity(ref, res.pre_correction_state))
                        branches += 1
    detail = f"n_max={max_parties} branches={branches} max_infidelity={worst:.3e}"
    return OracleResult("ame-phase-law", worst <= EXACT_TOL, detail)


def eq2_soundness() -> OracleResult:
    cases = []
    for n, m, colluders in ((3, 1, [2]), (4, 1, [3]), (4, 2, [3]), (4, 1, [2, 3])):
        part = Partition.build(n, 0, range(1, m + 1), colluders)
        cases.append(("orthogonal", part, AdversarySpec(source="eq2-orthogonal"), 0.5))
        cases.append(("equal", part, AdversarySpec(source="eq2-equal"), 1.0))
        cases.append(("dephased", part, AdversarySpec(behavior=Behavior("skip", "random")), 0.5))
    worst = 0.0
    for _, part, spec, expected in cases:
        p = acceptance_by_enumeration(part, spec)
        worst = max(worst, abs(p - expected))
    return OracleResult("eq2-soundness", worst <= EXACT_TOL, f"cases={len(cases)} max_deviation={worst:.3e}")


ORACLES = (verification_completeness, ame_phase_law, eq2_soundness)


def run_oracle_suite() -> list[OracleResult]:
    return [fn() for fn in ORACLES]
