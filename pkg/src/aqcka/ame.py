"""Anonymous extraction of a GHZ state on the participants.

Participants announce random bits, non-participants X-measure and announce
their outcomes, and Alice flips the phase of her qubit when the outcomes of
the non-participants have odd parity. Draws happen in party-id order; only
the wire order is shuffled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .adversary import HONEST, AdversarySpec, apply_colluder_actions
from .net import Network, Partition
from .qsim import Basis, Gate, StateVector, apply_gate, measure


@dataclass
class AmeRoundResult:
    announced: list[tuple[int, int]]
    correction_applied: int
    post_state: StateVector
    pre_correction_state: StateVector
    measured: dict[int, int] = field(default_factory=dict)


def parity_correction(announced: Iterable[tuple[int, int]] | dict, nonparticipant_ids: Iterable[int]) -> int:
    bits = dict(announced)
    out = 0
    for p in nonparticipant_ids:
        out ^= bits[p]
    return out


def run_ame(
    state: StateVector,
    partition: Partition,
    behaviors: AdversarySpec | None,
    net: Network,
    rng,
    round_index: int = 0,
    sanity_leak: bool = False,
) -> AmeRoundResult:
    """Run one AME round on ``state`` (one qubit per party).

    ``sanity_leak`` makes the participants repeat their bit in a second
    announcement. It exists only to check that the anonymity harness can
    detect a leak.
    """
    spec = behaviors or HONEST
    if state.n_qubits != partition.n:
        raise ValueError(f"state has {state.n_qubits} qubits for {partition.n} parties")
    state = apply_colluder_actions(state, spec, partition)
    announcements: dict[int, int | None] = {}
    measured = {}
    with net.step("ame", round_index):
        for p in range(partition.n):
            if p in partition.participants:
                bit = rng.bit()
                net.record(p, "draw", bit)
            elif p in partition.colluders and spec.behavior_for(p).kind != "measure":
                bit = spec.behavior_for(p).announce(rng)
            else:
                rec, state = measure(state, p, Basis.X, rng)
                bit = measured[p] = rec.outcome
                net.record(p, "x", bit)
            announcements[p] = bit
        announced = net.broadcast_round(announcements, rng, expected=range(partition.n))
        if sanity_leak:
            net.broadcast_round({p: announcements[p] for p in partition.participants}, rng)
    pre = state
    correction = parity_correction(announced, partition.nonparticipants)
    if correction:
        state = apply_gate(state, partition.alice, Gate.Z)
    return AmeRoundResult(announced, correction, state, pre, measured)
