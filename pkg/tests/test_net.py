import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aqcka.net import (
    BEACON,
    BROADCAST,
    PRIVATE,
    Event,
    Eve,
    EveType,
    ModelError,
    Network,
    Partition,
    ProtocolAbort,
    Transcript,
    extract_view,
    pseudonymize,
)
from aqcka.rng import Stream, enumerate_branches


def test_partition_validation():
    p = Partition.build(5, 0, [1, 2], [4])
    assert p.m == 2 and p.honest == frozenset([3])
    assert p.participants == frozenset([0, 1, 2])
    assert p.nonparticipants == frozenset([3, 4])
    assert [p.role(i) for i in range(5)] == ["alice", "bob", "bob", "honest", "colluder"]
    for bad in ((3, 0, [0]), (3, 0, [1], [1]), (3, 5, [1])):
        with pytest.raises((ModelError, ValueError)):
            Partition.build(*bad)


def test_private_channel_rules():
    net = Network(3)
    with pytest.raises(ValueError):
        net.send_private(1, 1, 0)
    with pytest.raises(ValueError):
        net.send_private(0, 3, 0)
    net.send_private(0, 1, 1)
    assert net.receive(0, 1) == 1
    with pytest.raises(ProtocolAbort):
        net.receive(0, 1)
    assert net.transcript.events[-1].phase == "abort"


def test_broadcast_shuffle_is_uniform_and_labelled():
    def fn(s):
        net = Network(3)
        out = net.broadcast_round({0: 1, 1: 0, 2: (1, 1)}, s)
        return tuple(p for p, _ in out), len(net.transcript)

    leaves = list(enumerate_branches(fn))
    assert len(leaves) == 6
    assert all(w == pytest.approx(1 / 6) and n_ev == 4 for w, (_, n_ev) in leaves)


def test_broadcast_missing_party_aborts():
    net = Network(3)
    with pytest.raises(ProtocolAbort) as exc:
        net.broadcast_round({0: 1, 1: None}, Stream.for_run(0), expected=range(3))
    assert exc.value.missing == (1, 2)


def test_beacon_rejects_bad_parameter():
    with pytest.raises(ValueError):
        Network(2).beacon_bit(0, Stream.for_run(0))
    assert Network(2).beacon_bit(1, Stream.for_run(0)) == 1


event_strategy = st.builds(
    lambda phase, rnd, kind, s, r, bit: (phase, rnd, kind, s, r, bit),
    st.sampled_from(["notification", "ame", "verification", "beacon"]),
    st.integers(0, 50),
    st.sampled_from([PRIVATE, BROADCAST, BEACON]),
    st.one_of(st.none(), st.integers(0, 9)),
    st.one_of(st.none(), st.integers(0, 9)),
    st.integers(0, 1),
)


@settings(max_examples=50, deadline=None)
@given(st.lists(event_strategy, max_size=30))
def test_transcript_roundtrip(rows):
    t = Transcript()
    for row in rows:
        t.append(*row)
    buf = io.StringIO()
    t.dump(buf)
    assert Transcript.load(buf.getvalue().splitlines()) == t


def test_event_line_format():
    e = Event(3, "ame", 0, BROADCAST, 2, None, 1)
    assert e.to_line() == "3\tame\t0\tbroadcast\t2\t-\t1"
    with pytest.raises(ValueError):
        Event.from_line("0\tame\t0\tcarrier-pigeon\t-\t-\t0")


def test_block_events_interleave_in_order():
    net = Network(3)
    net.announce(1)
    net.send_block([0, 1], [1, 2], [1, 0])
    net.announce(0)
    assert [e.seq for e in net.transcript.events] == [0, 1, 2, 3]
    assert [e.kind for e in net.transcript.events] == [BEACON, PRIVATE, PRIVATE, BEACON]


def test_eve_parse_and_check():
    e = Eve.parse("colluders:3+1")
    assert e.type is EveType.COLLUDERS and e.parties == frozenset([1, 3])
    assert str(Eve.parse("honest-np:2")) == "honest-np:2"
    with pytest.raises(ValueError):
        Eve.parse("bob:1,2")
    with pytest.raises(ModelError):
        Eve.parse("bob:2").check(Partition.build(3, 0, [1]))


def test_extract_view_filters_private_traffic():
    net = Network(4)
    net.send_private(0, 1, 1)
    net.send_private(2, 3, 0)
    net.broadcast_round({0: 0, 1: 1, 2: 1, 3: 0}, Stream.for_run(0))
    net.record(1, "draw", 1)
    net.record(2, "draw", 0)
    view = extract_view(net.transcript, "bob", [1], partition=Partition.build(4, 0, [1]))
    private = [e for e in view.visible_events if e.kind == PRIVATE]
    assert [(e.sender, e.receiver) for e in private] == [(0, 1)]
    assert len([e for e in view.visible_events if e.kind == BROADCAST]) == 4
    assert [r.party for r in view.records] == [1]


def test_pseudonymize_hides_other_ids():
    net = Network(3)
    net.send_private(2, 0, 1)
    key = pseudonymize(extract_view(net.transcript, "honest-np", [0]))
    assert key[0][0][3] == "p0" and key[0][0][4] == 0
