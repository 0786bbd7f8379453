import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quditlearn.dense import MAX_AMPLITUDES, DenseState, StateError, qft_matrix
from quditlearn.field import FieldParams

from conftest import make_rng


def random_state(q: int, m: int, key: int) -> DenseState:
    rng = make_rng(key)
    amps = rng.normal(size=q**m) + 1j * rng.normal(size=q**m)
    return DenseState(FieldParams(q), m, amps / np.linalg.norm(amps))


def test_single_basis_state():
    st_ = DenseState.from_basis_terms([((0,), 1.0)], FieldParams(3))
    assert st_.probabilities()[0] == pytest.approx(1.0)


def test_uniform_qutrit_probabilities():
    st_ = DenseState.from_basis_terms([((0,), 1), ((1,), 1), ((2,), 1)], FieldParams(3))
    assert np.allclose(st_.probabilities(), 1.0 / 3)


def test_sample_state_construction_n1_q3():
    # secret 2, no errors: terms (a, 2a mod 3), equal weight
    fp = FieldParams(3)
    st_ = DenseState.from_basis_terms([((a, 2 * a % 3), 1.0) for a in range(3)], fp)
    probs = st_.probabilities().reshape(3, 3)
    for a in range(3):
        assert probs[a, 2 * a % 3] == pytest.approx(1.0 / 3)
    assert probs.sum() == pytest.approx(1.0)


def test_duplicate_basis_terms_rejected():
    with pytest.raises(StateError):
        DenseState.from_basis_terms([((1,), 1.0), ((1,), 0.5)], FieldParams(3))


def test_all_zero_amplitudes_rejected():
    with pytest.raises(StateError):
        DenseState.from_basis_terms([((1,), 0.0)], FieldParams(3))


def test_mismatched_register_counts_rejected():
    with pytest.raises(StateError):
        DenseState.from_basis_terms([((1,), 1.0), ((1, 2), 1.0)], FieldParams(3))


def test_size_cap_enforced():
    fp = FieldParams(1021)
    assert 1021**3 > MAX_AMPLITUDES
    with pytest.raises(StateError, match="cap"):
        DenseState(fp, 3, np.zeros(8))  # cap rejection fires before shape checks


@pytest.mark.parametrize("q", [2, 3, 5, 7, 11, 31, 101])
def test_qft_matrix_unitary(q):
    f = qft_matrix(q)
    assert np.max(np.abs(f.conj().T @ f - np.eye(q))) <= 1e-9


def test_qft_of_zero_is_uniform():
    st_ = DenseState.from_basis_terms([((0,), 1.0)], FieldParams(5)).apply_qft(0)
    assert np.allclose(st_.probabilities(), 0.2, atol=1e-12)


def test_qft_then_inverse_restores_state():
    st_ = random_state(5, 3, key=11)
    back = st_.apply_qft(1).apply_inverse_qft(1)
    assert np.abs(back.amps - st_.amps).max() <= 1e-9


def test_qft_all_matches_per_register_path():
    st_ = random_state(7, 2, key=12)
    fused = st_.apply_qft_all()
    sequential = st_.apply_qft(0).apply_qft(1)
    assert np.abs(fused.amps - sequential.amps).max() <= 1e-12


def test_noiseless_recovery_probability_q3_n2():
    # total post-QFT probability of outcomes {(-j*s, j*): j* != 0} is (q-1)/q
    fp = FieldParams(3)
    s = (1, 2)
    terms = [((a0, a1, (a0 * s[0] + a1 * s[1]) % 3), 1.0) for a0 in range(3) for a1 in range(3)]
    post = DenseState.from_basis_terms(terms, fp).apply_qft_all()
    probs = post.probabilities().reshape(3, 3, 3)
    total = sum(
        probs[(-j * s[0]) % 3, (-j * s[1]) % 3, j] for j in range(1, 3)
    )
    assert total == pytest.approx(2.0 / 3, abs=1e-9)


def test_add_multiple_factor_zero_is_identity():
    st_ = random_state(5, 2, key=13)
    assert np.array_equal(st_.apply_add_multiple(0, 1, 0).amps, st_.amps)


def test_add_multiple_on_basis_state():
    fp = FieldParams(5)
    st_ = DenseState.from_basis_terms([((2, 1), 1.0)], fp).apply_add_multiple(0, 1, 3)
    probs = st_.probabilities().reshape(5, 5)
    assert probs[2, (1 + 3 * 2) % 5] == pytest.approx(1.0)


def test_add_multiple_inverse_pair():
    st_ = random_state(7, 2, key=14)
    roundtrip = st_.apply_add_multiple(0, 1, 3).apply_add_multiple(0, 1, 4)
    assert np.abs(roundtrip.amps - st_.amps).max() <= 1e-12


def test_add_multiple_preserves_probability_multiset_exactly():
    st_ = random_state(7, 2, key=15)
    shifted = st_.apply_add_multiple(1, 0, 5)
    assert np.array_equal(np.sort(st_.probabilities()), np.sort(shifted.probabilities()))


def test_add_multiple_requires_distinct_registers():
    with pytest.raises(StateError):
        random_state(3, 2, key=16).apply_add_multiple(1, 1, 1)


def test_measure_register_deterministic_on_basis_state(rng):
    st_ = DenseState.from_basis_terms([((0,), 1.0)], FieldParams(3))
    assert all(st_.measure_register(0, rng) == 0 for _ in range(50))


def test_measure_register_uniform_qutrit_frequencies(rng):
    st_ = DenseState.from_basis_terms([((v,), 1.0) for v in range(3)], FieldParams(3))
    n = 100_000
    counts = np.bincount([st_.measure_register(0, rng) for _ in range(n)], minlength=3)
    sigma = np.sqrt(n * (1 / 3) * (2 / 3))
    assert np.all(np.abs(counts - n / 3) <= 3 * sigma)


def test_sis_correct_candidate_screens_to_zero(rng):
    # (1/sqrt(5)) sum_a |a>|a*v>, add j*a with j = -v: first register QFTs to |0>
    fp = FieldParams(5)
    v = 2
    st_ = DenseState.from_basis_terms([((a, a * v % 5), 1.0) for a in range(5)], fp)
    screened = st_.apply_add_multiple(0, 1, (-v) % 5).apply_qft(0)
    assert screened.register_marginal(0)[0] == pytest.approx(1.0, abs=1e-12)
    assert all(screened.measure_register(0, rng) == 0 for _ in range(200))


def test_measure_all_on_basis_state(rng):
    st_ = DenseState.from_basis_terms([((3, 1), 1.0)], FieldParams(5))
    assert st_.measure_all(rng) == (3, 1)


def test_measure_all_marginal_uniform_noiseless_sample(rng):
    fp = FieldParams(5)
    s = 3
    st_ = DenseState.from_basis_terms([((a, a * s % 5), 1.0) for a in range(5)], fp)
    n = 100_000
    first = np.zeros(5, dtype=int)
    for _ in range(n):
        a, b = st_.measure_all(rng)
        assert b == a * s % 5
        first[a] += 1
    sigma = np.sqrt(n * 0.2 * 0.8)
    assert np.all(np.abs(first - n / 5) <= 3 * sigma)


def test_measured_category_frequencies_match_enumerated_distribution(rng):
    # post-QFT noisy sample at q=7, s=4; oracle = full amplitude enumeration
    fp = FieldParams(7)
    errors = [int(e) for e in make_rng(77).integers(-1, 2, size=7)]
    post = DenseState.from_basis_terms(
        [((a, (a * 4 + errors[a]) % 7), 1.0) for a in range(7)], fp
    ).apply_qft_all()
    probs = post.probabilities().reshape(7, 7)
    exact_secret_rate = sum(probs[(-j * 4) % 7, j] for j in range(1, 7))
    n = 20_000
    hits = 0
    for _ in range(n):
        j, jstar = post.measure_all(rng)
        if jstar != 0 and j == (-jstar * 4) % 7:
            hits += 1
    sigma = np.sqrt(exact_secret_rate * (1 - exact_secret_rate) / n)
    assert abs(hits / n - exact_secret_rate) <= 3 * sigma + 1e-12


def test_register_index_validation():
    st_ = random_state(3, 2, key=17)
    with pytest.raises(StateError):
        st_.apply_qft(2)
    with pytest.raises(StateError):
        st_.measure_register(-1, make_rng(1))


def test_corrupted_amplitudes_rejected():
    st_ = random_state(3, 2, key=18)
    bad = st_.amps.copy()
    bad[0] += 0.1
    with pytest.raises(StateError):
        DenseState(st_.fp, 2, bad)


@given(st.sampled_from([(2, 3), (3, 2), (5, 2), (7, 1)]), st.integers(0, 2**32 - 1))
def test_norm_preserved_through_random_pipelines(shape, key):
    q, m = shape
    state = random_state(q, m, key=key)
    rng = make_rng(key ^ 0xF00D)
    for _ in range(3):
        op = rng.integers(3)
        if op == 0:
            state = state.apply_qft(int(rng.integers(m)))
        elif op == 1 and m >= 2:
            regs = rng.choice(m, size=2, replace=False)
            state = state.apply_add_multiple(int(regs[0]), int(regs[1]), int(rng.integers(q)))
        else:
            state = state.apply_inverse_qft(int(rng.integers(m)))
    assert abs(float(np.vdot(state.amps, state.amps).real) - 1.0) <= 1e-9
