"""Simulated communication fabric and transcript capture.

A :class:`Network` gives the protocols private pairwise channels (with
mailboxes, so a missing message is detectable), a broadcast channel that
announces in a uniformly random order, and a public beacon that is not one of
the ``n`` parties. Everything is logged to a :class:`Transcript`.

Transcript export format, one event per line, tab separated::

    seq  phase  round  kind  sender  receiver  bit

with ``-`` for absent fields.
"""

from __future__ import annotations

from collections import defaultdict, deque
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

PRIVATE = "private"
BROADCAST = "broadcast"
BEACON = "beacon"
KINDS = (PRIVATE, BROADCAST, BEACON)


class ModelError(ValueError):
    """A party assignment or adversary description violates the model."""


class ProtocolAbort(Exception):
    """A party failed to deliver an expected message in time."""

    def __init__(self, phase: str, round_index: int, missing: Iterable[int]):
        self.phase = phase
        self.round_index = round_index
        self.missing = tuple(sorted(missing))
        super().__init__(f"abort in {phase} round {round_index}: no message from {self.missing}")


@dataclass(frozen=True)
class Partition:
    n: int
    alice: int
    bobs: frozenset[int]
    honest: frozenset[int]
    colluders: frozenset[int] = frozenset()

    def __post_init__(self):
        for name in ("bobs", "honest", "colluders"):
            object.__setattr__(self, name, frozenset(int(p) for p in getattr(self, name)))
        groups = [frozenset([self.alice]), self.bobs, self.honest, self.colluders]
        if sum(len(g) for g in groups) != self.n or frozenset().union(*groups) != frozenset(range(self.n)):
            raise ModelError(f"groups of {self} do not partition range({self.n})")

    @classmethod
    def build(cls, n: int, alice: int, bobs: Iterable[int], colluders: Iterable[int] = ()) -> "Partition":
        """Everyone not named is an honest non-participant."""
        bobs, colluders = frozenset(bobs), frozenset(colluders)
        honest = frozenset(range(n)) - bobs - colluders - {alice}
        return cls(n, alice, bobs, honest, colluders)

    @property
    def m(self) -> int:
        return len(self.bobs)

    @property
    def participants(self) -> frozenset[int]:
        return self.bobs | {self.alice}

    @property
    def nonparticipants(self) -> frozenset[int]:
        return self.honest | self.colluders

    def role(self, party: int) -> str:
        if party == self.alice:
            return "alice"
        if party in self.bobs:
            return "bob"
        if party in self.colluders:
            return "colluder"
        return "honest"

    def label(self) -> str:
        fmt = lambda s: "+".join(map(str, sorted(s))) or "-"
        return f"A={self.alice};B={fmt(self.bobs)};C={fmt(self.colluders)}"


@dataclass(frozen=True)
class Event:
    seq: int
    phase: str
    round: int
    kind: str
    sender: int | None
    receiver: int | None
    bit: int

    def to_line(self) -> str:
        f = lambda v: "-" if v is None else str(v)
        return "\t".join(
            (str(self.seq), self.phase, str(self.round), self.kind, f(self.sender), f(self.receiver), str(self.bit))
        )

    @classmethod
    def from_line(cls, line: str) -> "Event":
        seq, phase, rnd, kind, sender, receiver, bit = line.rstrip("\n").split("\t")
        g = lambda v: None if v == "-" else int(v)
        if kind not in KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        return cls(int(seq), phase, int(rnd), kind, g(sender), g(receiver), int(bit))


@dataclass(frozen=True)
class LocalRecord:
    """A value a party learns on its own: a draw or a measurement outcome."""

    phase: str
    round: int
    party: int
    label: str
    bit: int


class _PrivateBlock:
    """A run of private sends stored as arrays until someone reads them."""

    __slots__ = ("seq", "phase", "round", "senders", "receivers", "bits")

    def __init__(self, seq, phase, round_index, senders, receivers, bits):
        self.seq, self.phase, self.round = seq, phase, round_index
        self.senders, self.receivers, self.bits = senders, receivers, bits

    def __len__(self):
        return len(self.bits)

    def events(self) -> list[Event]:
        cols = (np.asarray(a).tolist() for a in (self.senders, self.receivers, self.bits))
        rows = zip(*cols)
        return [Event(self.seq + i, self.phase, self.round, PRIVATE, s, r, b) for i, (s, r, b) in enumerate(rows)]


class Transcript:
    """Ordered public and private events plus each party's local records."""

    def __init__(self, events: Iterable[Event] = (), local: Iterable[LocalRecord] = ()):
        self._items: list = list(events)
        self._size = len(self._items)
        self._lazy = False
        self.local: list[LocalRecord] = list(local)

    @property
    def events(self) -> list[Event]:
        if self._lazy:
            flat = []
            for item in self._items:
                if isinstance(item, _PrivateBlock):
                    flat.extend(item.events())
                else:
                    flat.append(item)
            self._items, self._lazy = flat, False
        return self._items

    def __len__(self) -> int:
        return self._size

    def __eq__(self, other):
        if not isinstance(other, Transcript):
            return NotImplemented
        return self.events == other.events and self.local == other.local

    def append(self, phase, round_index, kind, sender, receiver, bit) -> Event:
        ev = Event(self._size, phase, round_index, kind, sender, receiver, int(bit))
        self._items.append(ev)
        self._size += 1
        return ev

    def extend_private(self, phase, round_index, senders, receivers, bits) -> None:
        block = _PrivateBlock(self._size, phase, round_index, senders, receivers, bits)
        self._items.append(block)
        self._size += len(block)
        self._lazy = True

    def phase_events(self, phase: str) -> list[Event]:
        return [e for e in self.events if e.phase == phase]

    def to_lines(self) -> list[str]:
        return [e.to_line() for e in self.events]

    def dump(self, fh: TextIO) -> None:
        for line in self.to_lines():
            fh.write(line + "\n")

    @classmethod
    def load(cls, lines: Iterable[str]) -> "Transcript":
        return cls([Event.from_line(l) for l in lines if l.strip()])


class Network:
    """Channels for one run; mutated only by that run's scheduler."""

    def __init__(self, n: int, transcript: Transcript | None = None):
        self.n = n
        self.transcript = transcript if transcript is not None else Transcript()
        self.phase = "-"
        self.round = 0
        self._inbox: dict[tuple[int, int], deque] = defaultdict(deque)

    @contextmanager
    def step(self, phase: str, round_index: int):
        saved = self.phase, self.round
        self.phase, self.round = phase, round_index
        try:
            yield self
        finally:
            self.phase, self.round = saved

    def _check_party(self, p: int) -> None:
        if not 0 <= p < self.n:
            raise ValueError(f"party {p} is not in a network of {self.n}")

    def send_private(self, sender: int, receiver: int, bit: int) -> None:
        self._check_party(sender)
        self._check_party(receiver)
        if sender == receiver:
            raise ValueError("private channel needs two distinct parties; use keep_local")
        self._deliver(sender, receiver, bit)

    def keep_local(self, party: int, bit: int) -> None:
        """A share a party assigns to itself, logged like a private send."""
        self._check_party(party)
        self._deliver(party, party, bit)

    def _deliver(self, sender, receiver, bit):
        self.transcript.append(self.phase, self.round, PRIVATE, sender, receiver, bit)
        self._inbox[(sender, receiver)].append(int(bit))

    def send_block(self, senders, receivers, bits) -> None:
        """Log many private sends at once (self-shares allowed) without queueing
        them; the caller combines the bits itself and passes valid party ids."""
        self.transcript.extend_private(self.phase, self.round, senders, receivers, bits)

    def receive(self, sender: int, receiver: int) -> int:
        box = self._inbox.get((sender, receiver))
        if not box:
            self.abort([sender])
        return box.popleft()

    def record(self, party: int, label: str, bit: int) -> None:
        self.transcript.local.append(LocalRecord(self.phase, self.round, party, label, int(bit)))

    def abort(self, missing: Iterable[int]):
        missing = tuple(missing)
        self.transcript.append("abort", self.round, BEACON, None, None, 1)
        raise ProtocolAbort(self.phase, self.round, missing)

    def broadcast_round(
        self,
        announcements: Mapping[int, int | Sequence[int] | None],
        rng,
        expected: Iterable[int] | None = None,
    ) -> list[tuple[int, int | tuple[int, ...]]]:
        """Announce every party's payload in one uniformly shuffled order.

        A payload is a bit or a tuple of bits (emitted as consecutive events).
        ``None`` or an absent ``expected`` party means the slot was missed,
        which aborts the round.
        """
        parties = sorted(announcements) if expected is None else sorted(expected)
        missing = [p for p in parties if announcements.get(p) is None]
        if missing:
            self.abort(missing)
        order = rng.permutation(len(parties))
        out = []
        for idx in order:
            p = parties[idx]
            payload = announcements[p]
            if isinstance(payload, (int, np.integer)):
                payload = int(payload)
                bits = (payload,)
            else:
                payload = bits = tuple(int(b) for b in payload)
            for b in bits:
                self.transcript.append(self.phase, self.round, BROADCAST, p, None, b)
            out.append((p, payload))
        return out

    def beacon_bit(self, d_param: int, rng) -> int:
        if int(d_param) < 1:
            raise ValueError(f"beacon parameter must be >= 1, got {d_param}")
        b = rng.beacon(int(d_param))
        self.transcript.append(self.phase, self.round, BEACON, None, None, b)
        return b

    def announce(self, bit: int) -> None:
        """Trusted announcement relayed by the beacon on a party's request."""
        self.transcript.append(self.phase, self.round, BEACON, None, None, bit)


class EveType(str, Enum):
    BOB = "bob"
    HONEST_NP = "honest-np"
    COLLUDERS = "colluders"


@dataclass(frozen=True)
class Eve:
    type: EveType
    parties: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "type", EveType(self.type))
        object.__setattr__(self, "parties", frozenset(int(p) for p in self.parties))
        if not self.parties:
            raise ModelError("Eve must control at least one party")
        if self.type is not EveType.COLLUDERS and len(self.parties) != 1:
            raise ModelError(f"{self.type.value} Eve controls exactly one party")

    @classmethod
    def parse(cls, text: str) -> "Eve":
        """``honest-np:2``, ``bob:1`` or ``colluders:2,3``."""
        kind, _, ids = text.partition(":")
        if not ids:
            raise ValueError(f"Eve spec {text!r} needs party ids after ':'")
        return cls(EveType(kind.strip()), frozenset(int(x) for x in ids.replace("+", ",").split(",")))

    def check(self, partition: Partition) -> None:
        p = self.parties
        if self.type is EveType.COLLUDERS:
            if partition.alice in p or p & partition.bobs:
                raise ModelError("colluders are non-participants")
            if p != partition.colluders:
                raise ModelError("colluder Eve must control exactly the colluder set")
        elif self.type is EveType.BOB and not p <= partition.bobs:
            raise ModelError(f"party {set(p)} is not a Bob in {partition.label()}")
        elif self.type is EveType.HONEST_NP and not p <= partition.honest:
            raise ModelError(f"party {set(p)} is not an honest non-participant in {partition.label()}")

    def __str__(self):
        return f"{self.type.value}:{','.join(map(str, sorted(self.parties)))}"


@dataclass(frozen=True)
class EveView:
    eve_type: EveType
    eve_parties: frozenset[int]
    visible_events: tuple[Event, ...]
    records: tuple[LocalRecord, ...] = ()
    visible_quantum: np.ndarray | None = None

    def key(self, drop_own_broadcasts: bool = False) -> tuple:
        """Hashable canonical form; sequence numbers are renumbered away."""
        evs = tuple(
            (e.phase, e.round, e.kind, e.sender, e.receiver, e.bit)
            for e in self.visible_events
            if not (drop_own_broadcasts and e.kind == BROADCAST and e.sender in self.eve_parties)
        )
        recs = tuple((r.phase, r.round, r.party, r.label, r.bit) for r in self.records)
        return evs, recs


def extract_view(
    transcript: Transcript,
    eve_type: EveType | str,
    eve_parties: Iterable[int],
    partition: Partition | None = None,
    state=None,
) -> EveView:
    """Filter a transcript down to what the given Eve observes.

    With ``partition`` the Eve's role is validated; with ``state`` the reduced
    density matrix of Eve's qubits is attached.
    """
    eve = Eve(eve_type, frozenset(eve_parties))
    if partition is not None:
        eve.check(partition)
    parties = eve.parties
    events = tuple(
        e for e in transcript.events if e.kind != PRIVATE or e.sender in parties or e.receiver in parties
    )
    records = tuple(r for r in transcript.local if r.party in parties)
    quantum = None
    if state is not None:
        from .qsim import reduced_density

        quantum = reduced_density(state, parties)
    return EveView(eve.type, parties, events, records, quantum)


def pseudonymize(view: EveView) -> tuple:
    """View key with non-Eve party ids replaced by first-appearance pseudonyms."""
    names: dict[int, str] = {}

    def alias(p):
        if p is None or p in view.eve_parties:
            return p
        return names.setdefault(p, f"p{len(names)}")

    evs = tuple(
        (e.phase, e.round, e.kind, alias(e.sender), alias(e.receiver), e.bit) for e in view.visible_events
    )
    recs = tuple((r.phase, r.round, r.party, r.label, r.bit) for r in view.records)
    return evs, recs
