"""Full conference-key runs: notification, then one fresh GHZ state per round.

Each round runs AME, asks the beacon for a bit, and spends the state on a
verification round (bit 0) or a silent key-generation round (bit 1). Alice
validates at the end, through a beacon-relayed announcement, when no more than
``failure_threshold`` verification rounds failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .adversary import HONEST, AdversarySpec, emit_source_state
from .ame import run_ame
from .net import Network, Partition, ProtocolAbort, Transcript
from .notification import run_notification
from .qsim import DEFAULT_MAX_QUBITS, Basis, CapacityError, StateVector, measure
from .rng import Stream, check_seed
from .verification import run_verification


@dataclass
class AckaConfig:
    n: int
    m: int
    l_states: int
    d_param: int
    seed: int
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    max_qubits: int = DEFAULT_MAX_QUBITS
    partition: Partition | None = None
    failure_threshold: int = 0
    sanity_leak: bool = False

    def __post_init__(self):
        if self.m < 0 or self.m + 1 > self.n:
            raise ValueError(f"need 0 <= m and m + 1 <= n, got n={self.n}, m={self.m}")
        if self.l_states < 1:
            raise ValueError("need at least one GHZ state")
        if self.d_param < 1:
            raise ValueError("beacon parameter D must be >= 1")
        if self.n > self.max_qubits:
            raise CapacityError(f"{self.n} parties exceed the {self.max_qubits}-qubit limit")
        check_seed(self.seed)
        if self.partition is None:
            colluders = self.adversary.colluders or frozenset()
            free = [p for p in range(self.n) if p not in colluders]
            if len(free) < self.m + 1:
                raise ValueError("not enough non-colluding parties for Alice and the Bobs")
            self.partition = Partition.build(self.n, free[0], free[1 : self.m + 1], colluders)
        p = self.partition
        if p.n != self.n or p.m != self.m:
            raise ValueError("partition does not match n and m")
        self.adversary.validate(p)


@dataclass
class RunOutcome:
    key_bits: dict[int, str]
    verification_rounds: int
    verification_failures: int
    keygen_rounds: int
    aborted: int
    alice_validates: int
    l_states: int
    diagnostics: dict = field(default_factory=dict)


@dataclass
class RoundRecord:
    kind: str  # "verification" or "keygen"
    accepted: int | None
    key: dict[int, int] | None
    final_state: StateVector


def keygen_round(state: StateVector, partition: Partition, rng, net: Network | None = None) -> dict[int, int]:
    """Participants Z-measure; nothing is communicated."""
    bits = {}
    for p in sorted(partition.participants):
        rec, state = measure(state, p, Basis.Z, rng)
        bits[p] = rec.outcome
        if net is not None:
            net.record(p, "key", rec.outcome)
    return bits


def run_round(
    index: int,
    partition: Partition,
    adversary: AdversarySpec | None,
    net: Network,
    rng,
    d_param: int,
    max_qubits: int = DEFAULT_MAX_QUBITS,
    sanity_leak: bool = False,
) -> RoundRecord:
    state = emit_source_state(adversary, partition, max_qubits)
    ame = run_ame(state, partition, adversary, net, rng, round_index=index, sanity_leak=sanity_leak)
    with net.step("beacon", index):
        b = net.beacon_bit(d_param, rng)
    if b == 0:
        ver = run_verification(ame.post_state, partition, net, rng, round_index=index, adversary=adversary)
        return RoundRecord("verification", ver.accepted, None, ver.post_state)
    with net.step("keygen", index):
        key = keygen_round(ame.post_state, partition, rng, net)
    return RoundRecord("keygen", None, key, ame.post_state)


def announce_validation(net: Network, validates: int, round_index: int) -> None:
    with net.step("validation", round_index):
        net.announce(validates)


def run_acka(config: AckaConfig, run_index: int = 0) -> tuple[RunOutcome, Transcript]:
    partition = config.partition
    adversary = config.adversary or HONEST
    rng = Stream.for_run(config.seed, run_index)
    net = Network(config.n)
    participants = sorted(partition.participants)
    keys = {p: [] for p in participants}
    ver_rounds = failures = keygen = 0
    try:
        notified = run_notification(partition, net, rng, silent=adversary.silent(partition))
        receivers = {p for p, z in notified.items() if z}
        if receivers != set(partition.bobs):
            raise RuntimeError(f"notification reached {sorted(receivers)}, expected {sorted(partition.bobs)}")
        for index in range(config.l_states):
            rec = run_round(
                index, partition, adversary, net, rng, config.d_param, config.max_qubits, config.sanity_leak
            )
            if rec.kind == "verification":
                ver_rounds += 1
                failures += 1 - rec.accepted
            else:
                keygen += 1
                for p, bit in rec.key.items():
                    keys[p].append(str(bit))
    except ProtocolAbort as exc:
        partial = {p: "".join(bits) for p, bits in keys.items()}
        outcome = RunOutcome(
            {p: "" for p in participants}, ver_rounds, failures, keygen, 1, 0, config.l_states,
            {"partial_keys": partial, "abort": str(exc)},
        )
        return outcome, net.transcript
    validates = int(failures <= config.failure_threshold)
    announce_validation(net, validates, config.l_states)
    outcome = RunOutcome(
        {p: "".join(bits) for p, bits in keys.items()}, ver_rounds, failures, keygen, 0, validates, config.l_states
    )
    return outcome, net.transcript


def key_rate(outcome: RunOutcome) -> float:
    if outcome.aborted:
        raise ValueError("key rate is undefined for an aborted run")
    return outcome.keygen_rounds / outcome.l_states
