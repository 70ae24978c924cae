import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aqcka.net import Partition
from aqcka.qsim import (
    Basis,
    CapacityError,
    Gate,
    ShapeError,
    StateVector,
    apply_gate,
    apply_unitary,
    fidelity,
    measure,
    outcome_probabilities,
    prepare_adversarial_state,
    prepare_ghz,
    project,
    reduced_density,
    restrict,
    tensor,
    trace_distance,
)
from aqcka.rng import Stream

import reference as ref

GATES = {Gate.H: ref.H, Gate.Z: ref.Z, Gate.S: ref.S, Gate.S_DAGGER: ref.S.conj().T}


@st.composite
def register(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return n, ref.random_state(np.random.default_rng(seed), n)


def test_ghz_amplitudes():
    for n in range(1, 8):
        assert np.allclose(prepare_ghz(n).amplitudes, ref.ghz(n))


def test_ghz_capacity():
    with pytest.raises(CapacityError):
        prepare_ghz(17)
    assert prepare_ghz(3, max_qubits=3).n_qubits == 3
    with pytest.raises(CapacityError):
        prepare_ghz(4, max_qubits=3)


def test_statevector_rejects_bad_length():
    with pytest.raises(ShapeError):
        StateVector(2, np.ones(3))


def test_basis_state_bit_order():
    s = StateVector.basis_state([1, 0, 0])
    assert s.amplitudes[1] == 1


def test_pairs_roundtrip():
    s = prepare_ghz(3)
    assert np.allclose(StateVector.from_pairs(s.to_pairs()).amplitudes, s.amplitudes)


def test_tensor_first_factor_low_qubits():
    s = tensor(StateVector.basis_state([1]), StateVector.basis_state([0]))
    assert np.allclose(s.amplitudes, StateVector.basis_state([1, 0]).amplitudes)


@settings(max_examples=60, deadline=None)
@given(register(), st.data())
def test_gate_matches_kron(reg, data):
    n, psi = reg
    q = data.draw(st.integers(0, n - 1))
    gate = data.draw(st.sampled_from(list(GATES)))
    out = apply_gate(StateVector(n, psi), q, gate)
    assert np.allclose(out.amplitudes, ref.on_qubit(GATES[gate], q, n) @ psi, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(register(max_n=4), st.data())
def test_two_qubit_unitary_matches_kron(reg, data):
    n, psi = reg
    if n < 2:
        return
    q0, q1 = data.draw(st.permutations(range(n)))[:2]
    # CNOT with control on the first listed qubit (the LSB of the 4x4 matrix)
    cnot = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
    out = apply_unitary(StateVector(n, psi), cnot, [q0, q1])
    expect = np.zeros_like(psi)
    for i in range(2**n):
        j = i ^ (1 << q1) if (i >> q0) & 1 else i
        expect[j] = psi[i]
    assert np.allclose(out.amplitudes, expect, atol=1e-12)


def test_unitary_rejects_non_unitary():
    with pytest.raises(ValueError):
        apply_unitary(prepare_ghz(2), np.ones((2, 2)), [0])


@settings(max_examples=80, deadline=None)
@given(register(), st.data())
def test_projection_matches_projector(reg, data):
    n, psi = reg
    q = data.draw(st.integers(0, n - 1))
    basis = data.draw(st.sampled_from("XYZ"))
    for outcome in (0, 1):
        v = ref.projector(q, basis, outcome, n) @ psi
        p_ref = np.vdot(v, v).real
        p, post = project(StateVector(n, psi), q, basis, outcome)
        assert abs(p - p_ref) < 1e-12
        if post is not None:
            assert abs(fidelity(post, StateVector(n, v / np.sqrt(p_ref))) - 1) < 1e-10


@settings(max_examples=40, deadline=None)
@given(register(), st.data())
def test_probabilities_sum_to_one(reg, data):
    n, psi = reg
    q = data.draw(st.integers(0, n - 1))
    p0, p1 = outcome_probabilities(StateVector(n, psi), q, data.draw(st.sampled_from(list(Basis))))
    assert abs(p0 + p1 - 1) < 1e-12


def test_measure_leaves_eigenstate_and_is_seeded():
    for basis in "XYZ":
        rec, post = measure(prepare_ghz(3), 1, basis, Stream.for_run(5))
        rho = reduced_density(post, [1])
        e = ref.EIGEN[basis][rec.outcome]
        assert abs(np.vdot(e, rho @ e).real - 1) < 1e-12
        again, _ = measure(prepare_ghz(3), 1, basis, Stream.for_run(5))
        assert again == rec


def test_measure_consumes_one_deviate():
    a, b = Stream.for_run(9), Stream.for_run(9)
    measure(prepare_ghz(2), 0, "X", a)
    b.uniform()
    assert a.uniform() == b.uniform()


def test_born_frequencies():
    psi = StateVector.from_amplitudes([np.sqrt(0.2), np.sqrt(0.8)])
    rng = Stream.for_run(1)
    ones = sum(measure(psi, 0, "Z", rng)[0].outcome for _ in range(20000))
    assert abs(ones - 16000) < 4 * np.sqrt(20000 * 0.16)


@settings(max_examples=40, deadline=None)
@given(register(max_n=4), st.data())
def test_reduced_density_matches_loop_trace(reg, data):
    n, psi = reg
    keep = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    rho = reduced_density(StateVector(n, psi), keep)
    assert np.allclose(rho, ref.partial_trace(psi, keep, n), atol=1e-12)
    assert abs(np.trace(rho) - 1) < 1e-12


def test_ghz_marginal_is_dephased():
    rho = reduced_density(prepare_ghz(4), [0, 2])
    assert np.allclose(rho, np.diag([0.5, 0, 0, 0.5]))


def test_trace_distance_known_values():
    zero, one = np.diag([1.0, 0]), np.diag([0, 1.0])
    assert trace_distance(zero, one) == pytest.approx(1)
    assert trace_distance(zero, zero) == pytest.approx(0)
    plus = np.full((2, 2), 0.5)
    assert trace_distance(zero, plus) == pytest.approx(np.sqrt(0.5))


def test_fidelity_with_density_matrix():
    g = prepare_ghz(2)
    assert fidelity(g, np.outer(g.amplitudes, g.amplitudes.conj())) == pytest.approx(1)
    with pytest.raises(ShapeError):
        fidelity(g, prepare_ghz(3))


def test_restrict_product_and_entangled():
    s = tensor(StateVector.basis_state([1]), prepare_ghz(2))
    assert abs(fidelity(restrict(s, [0]), StateVector.basis_state([1])) - 1) < 1e-12
    with pytest.raises(ValueError):
        restrict(prepare_ghz(2), [0])


def test_adversarial_equal_states_factorize():
    part = Partition.build(4, 0, [1], [2, 3])
    psi = tensor(StateVector.from_amplitudes([1, 1]), StateVector.basis_state([1]))
    s = prepare_adversarial_state(4, part, psi, psi)
    honest = reduced_density(s, [0, 1])
    assert np.allclose(honest, np.outer(ref.ghz(2), ref.ghz(2).conj()), atol=1e-12)
    rho_c = reduced_density(s, [2, 3])
    v = psi.amplitudes / np.linalg.norm(psi.amplitudes)
    assert np.allclose(rho_c, np.outer(v, v.conj()), atol=1e-12)


def test_adversarial_orthogonal_single_colluder_is_ghz():
    part = Partition.build(3, 1, [2], [0])
    s = prepare_adversarial_state(3, part, StateVector.basis_state([0]), StateVector.basis_state([1]))
    assert np.allclose(s.amplitudes, ref.ghz(3))


def test_adversarial_shape_checked():
    part = Partition.build(3, 0, [1], [2])
    with pytest.raises(ShapeError):
        prepare_adversarial_state(3, part, prepare_ghz(2), prepare_ghz(2))
