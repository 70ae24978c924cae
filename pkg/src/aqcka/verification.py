"""Alice's anonymous X/Y stabilizer check of the participants' state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .adversary import HONEST, AdversarySpec
from .net import Network, Partition
from .qsim import Basis, StateVector, measure

BASES = (Basis.X, Basis.Y)


class PredicateError(ValueError):
    """Basis bits with odd sum reached the acceptance test."""


@dataclass
class VerificationRound:
    basis_bits: dict[int, int]
    outcomes: dict[int, int]
    masking_bits: dict[int, tuple[int, int]]
    alice_announced: tuple[int, int]
    alice_final: tuple[int, int]
    accepted: int
    announced: list[tuple[int, tuple[int, int]]]
    pre_alice_state: StateVector
    post_state: StateVector


def acceptance_predicate(b_bits: Sequence[int], o_bits: Sequence[int]) -> int:
    """1 iff half the basis-bit sum plus the outcome sum is even."""
    sb = sum(int(b) for b in b_bits)
    if sb % 2:
        raise PredicateError(f"basis bits sum to {sb}, which is odd")
    return int((sb // 2 + sum(int(o) for o in o_bits)) % 2 == 0)


def verification_phase(sign: int, b_bits: Sequence[int], o_bits: Sequence[int]) -> complex:
    """Relative phase left on Alice and the colluders once the Bobs have measured.

    ``sign`` is the +-1 phase of the state entering the round; the Bobs'
    projections contribute (-1)^(sum of outcomes) * (-i)^(number of Y bases).
    """
    ys = sum(int(b) for b in b_bits)
    return sign * (-1) ** (sum(int(o) for o in o_bits) % 2) * (-1j) ** ys


def run_verification(
    state: StateVector,
    partition: Partition,
    net: Network,
    rng,
    round_index: int = 0,
    adversary: AdversarySpec | None = None,
) -> VerificationRound:
    spec = adversary or HONEST
    announcements: dict[int, tuple[int, int] | None] = {}
    basis_bits, outcomes, masks = {}, {}, {}
    alice = partition.alice
    with net.step("verification", round_index):
        for p in range(partition.n):
            if p in partition.bobs:
                b = basis_bits[p] = rng.bit()
                rec, state = measure(state, p, BASES[b], rng)
                o = outcomes[p] = rec.outcome
                net.record(p, "basis", b)
                net.record(p, "outcome", o)
                announcements[p] = (b, o)
            elif p == alice:
                decoy = (rng.bit(), rng.bit())
                announcements[p] = decoy
            elif p in partition.colluders and spec.behavior_for(p).kind == "withhold":
                announcements[p] = None
            else:
                masks[p] = announcements[p] = (rng.bit(), rng.bit())
        announced = net.broadcast_round(announcements, rng, expected=range(partition.n))
        pre_alice = state
        # Alice only trusts what the parties she notified announced
        b0 = 0
        for p, (b, _) in announced:
            if p in partition.bobs:
                b0 ^= b
        rec, state = measure(state, alice, BASES[b0], rng)
        o0 = rec.outcome
        net.record(alice, "basis", b0)
        net.record(alice, "outcome", o0)
    basis_bits[alice], outcomes[alice] = b0, o0
    order = sorted(partition.participants)
    accepted = acceptance_predicate([basis_bits[p] for p in order], [outcomes[p] for p in order])
    return VerificationRound(
        basis_bits, outcomes, masks, announcements[alice], (b0, o0), accepted, announced, pre_alice, state
    )
