from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aqcka.adversary import AdversarySpec, Behavior, emit_source_state
from aqcka.ame import run_ame
from aqcka.net import Network, Partition
from aqcka.oracles import acceptance_by_enumeration, stabilizer_acceptance
from aqcka.qsim import StateVector, prepare_ghz, reduced_density
from aqcka.rng import Stream, enumerate_branches
from aqcka.verification import PredicateError, acceptance_predicate, run_verification, verification_phase

import reference as ref


def test_predicate_table():
    assert acceptance_predicate([0, 0], [0, 0]) == 1
    assert acceptance_predicate([0, 0], [1, 0]) == 0
    assert acceptance_predicate([1, 1], [0, 0]) == 0
    assert acceptance_predicate([1, 1], [1, 0]) == 1
    with pytest.raises(PredicateError):
        acceptance_predicate([1, 0], [0, 0])


@settings(max_examples=100)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=8))
def test_predicate_matches_stabilizer_sign(pairs):
    bits = [b for b, _ in pairs]
    if sum(bits) % 2:
        bits[0] ^= 1
    outs = [o for _, o in pairs]
    # an X/Y product with k Y's has eigenvalue (-1)^(k/2) on GHZ+
    expect = int((-1) ** sum(outs) == (-1) ** (sum(bits) // 2))
    assert acceptance_predicate(bits, outs) == expect


def test_ghz_always_accepted_small():
    for size in range(1, 5):
        part = Partition.build(size, size - 1, range(size - 1))
        assert acceptance_by_enumeration(part, with_ame=False) == pytest.approx(1, abs=1e-12)


def test_phase_flipped_ghz_always_rejected():
    amps = ref.ghz(3).copy()
    amps[-1] *= -1
    part = Partition.build(3, 0, [1, 2])

    def fn(s):
        return run_verification(StateVector(3, amps), part, Network(3), s).accepted

    assert sum(w * a for w, a in enumerate_branches(fn, shuffles=False)) == pytest.approx(0, abs=1e-12)


def test_enumeration_matches_stabilizer_formula_on_random_states():
    rng = np.random.default_rng(4)
    part = Partition.build(3, 1, [0, 2])
    for _ in range(5):
        psi = ref.random_state(rng, 3)
        fn = lambda s: run_verification(StateVector(3, psi), part, Network(3), s).accepted
        p_enum = sum(w * a for w, a in enumerate_branches(fn, shuffles=False))
        p_ref = stabilizer_acceptance(np.outer(psi, psi.conj()), [0, 1, 2], 1, 3)
        assert p_enum == pytest.approx(p_ref, abs=1e-12)


def test_alice_basis_completes_even_sum():
    part = Partition.build(5, 2, [0, 1, 4], [3])
    for seed in range(30):
        rnd = run_verification(prepare_ghz(5), part, Network(5), Stream.for_run(seed))
        assert sum(rnd.basis_bits.values()) % 2 == 0
        assert set(rnd.basis_bits) == set(part.participants)


def test_gamma_phase_on_alice_and_colluders():
    # entangled source: after the Bobs measure, Alice and C hold |0>|Psi> + gamma |1>|Phi>
    part = Partition.build(4, 0, [1, 2], [3])
    spec = AdversarySpec(source="eq2-orthogonal")

    def fn(s):
        net = Network(4)
        ame = run_ame(emit_source_state(spec, part), part, spec, net, s)
        rnd = run_verification(ame.post_state, part, net, s, adversary=spec)
        return rnd

    for _, rnd in enumerate_branches(fn, shuffles=False):
        bobs = sorted(part.bobs)
        gamma = verification_phase(1, [rnd.basis_bits[b] for b in bobs], [rnd.outcomes[b] for b in bobs])
        # two-qubit register: bit 0 is Alice (qubit 0), bit 1 the colluder (qubit 3)
        w = np.array([1, 0, 0, gamma], dtype=complex) / np.sqrt(2)
        rho = reduced_density(rnd.pre_alice_state, [0, 3])
        assert np.vdot(w, rho @ w).real == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize(
    "spec,expected",
    [
        (AdversarySpec(source="eq2-orthogonal"), 0.5),
        (AdversarySpec(source="eq2-equal"), 1.0),
        (AdversarySpec(behavior=Behavior("skip", "zero")), 0.5),
        (AdversarySpec(behavior=Behavior("skip", "random")), 0.5),
        (AdversarySpec(), 1.0),
    ],
)
def test_soundness_cases(spec, expected):
    part = Partition.build(3, 0, [1], [2])
    assert acceptance_by_enumeration(part, spec) == pytest.approx(expected, abs=1e-12)


def test_masks_and_decoy_uniform():
    part = Partition.build(3, 0, [1])
    dist = {}
    fn = lambda s: dict(run_verification(prepare_ghz(3), part, Network(3), s).announced)
    for w, ann in enumerate_branches(fn, shuffles=False):
        for p, pair in ann.items():
            dist.setdefault(p, {}).setdefault(pair, 0.0)
            dist[p][pair] += w
    for p in range(3):
        assert set(dist[p]) == set(product((0, 1), repeat=2))
        assert all(v == pytest.approx(0.25) for v in dist[p].values())
