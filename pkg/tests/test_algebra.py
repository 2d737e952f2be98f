import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankica import algebra
from rankica.densities import Gaussian
from rankica.errors import AmbiguousOrdering, DimensionMismatch, SingularMatrix
from rankica.scores import g_f_matrix, score_moments

L_BENCH = np.array([[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]])


def _random_nonsingular(rng, k):
    while True:
        m = rng.normal(size=(k, k))
        if np.linalg.cond(m) < 1e6:
            return m


# ---------------------------------------------------------------------------
# canonical form


def test_pi_identity_and_benchmark_matrix_are_fixed_points():
    np.testing.assert_array_equal(algebra.pi_normalize(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(algebra.pi_normalize(L_BENCH), L_BENCH, rtol=0, atol=1e-15)


def test_pi_collapses_all_signed_permutations_of_benchmark_matrix():
    # every column permutation and sign pattern, with random magnitudes
    rng = np.random.default_rng(1)
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product([-1.0, 1.0], repeat=3):
            P = np.eye(3)[:, list(perm)]
            D1 = np.diag(np.array(signs) * rng.uniform(0.1, 10, 3))
            D2 = np.diag(rng.choice([-1.0, 1.0], 3) * rng.uniform(0.1, 10, 3))
            np.testing.assert_allclose(algebra.pi_normalize(L_BENCH @ D1 @ P @ D2), L_BENCH, atol=1e-12)


def test_pi_collapse_on_200_random_draws():
    rng = np.random.default_rng(2)
    for _ in range(200):
        np.testing.assert_allclose(
            algebra.pi_normalize(algebra.random_equivalent(L_BENCH, rng)), L_BENCH, atol=1e-12
        )


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 5))
def test_pi_idempotent_and_class_invariant(seed, k):
    rng = np.random.default_rng(seed)
    m = _random_nonsingular(rng, k)
    try:
        c = algebra.pi_normalize(m)
    except AmbiguousOrdering:
        return
    np.testing.assert_array_equal(algebra.pi_normalize(c), c)
    np.testing.assert_array_equal(np.diag(c), np.ones(k))
    np.testing.assert_allclose(algebra.pi_normalize(algebra.random_equivalent(m, rng)), c, rtol=1e-10, atol=1e-10)
    assert algebra.is_canonical(c)


def test_pi_errors():
    with pytest.raises(SingularMatrix):
        algebra.pi_normalize(np.ones((3, 3)))
    with pytest.raises(AmbiguousOrdering):
        algebra.pi_normalize(np.array([[1.0, 1.0], [1.0, -1.0]]))
    with pytest.raises(DimensionMismatch):
        algebra.pi_normalize(np.ones((2, 3)))


# ---------------------------------------------------------------------------
# diagonal-free vectorization


def test_vecd_examples():
    np.testing.assert_array_equal(algebra.vecd_o(np.eye(3)), np.zeros(6))
    np.testing.assert_array_equal(algebra.matd_o(np.zeros(6)), np.zeros((3, 3)))
    m = np.arange(1, 10, dtype=float).reshape(3, 3, order="F")
    np.testing.assert_array_equal(algebra.vecd_o(m), [2, 3, 4, 6, 7, 8])


@given(seed=st.integers(0, 10_000), k=st.integers(1, 6))
def test_vecd_matd_round_trip(seed, k):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(k, k))
    v = algebra.vecd_o(m)
    np.testing.assert_array_equal(algebra.matd_o(v, k), algebra.odiag(m))
    np.testing.assert_array_equal(algebra.vecd_o(algebra.matd_o(v, k)), v)


def test_matd_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        algebra.matd_o(np.zeros(5))


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_selection_matrix(k):
    C = algebra.selection_matrix(k)
    assert C.shape == (k * (k - 1), k * k)
    assert set(np.unique(C)) <= {0.0, 1.0}
    np.testing.assert_array_equal(C.sum(axis=1), np.ones(k * (k - 1)))
    m = np.random.default_rng(k).normal(size=(k, k))
    np.testing.assert_array_equal(C @ algebra.vec(m), algebra.vecd_o(m))


# ---------------------------------------------------------------------------
# Amari error


def test_amari_hand_case():
    # W = b^{-1} a = [[1, .5], [.5, 1]]: each of the four ratios is 1.5
    assert algebra.amari_error(np.array([[1.0, 0.5], [0.5, 1.0]]), np.eye(2)) == pytest.approx(0.5, abs=1e-15)


def test_amari_zero_on_equivalent_matrices():
    rng = np.random.default_rng(3)
    A = _random_nonsingular(rng, 4)
    assert algebra.amari_error(A, A) == pytest.approx(0.0, abs=1e-12)
    for _ in range(100):
        P = np.eye(4)[:, rng.permutation(4)]
        D = np.diag(rng.uniform(0.1, 10, 4) * rng.choice([-1, 1], 4))
        assert algebra.amari_error(A @ P @ D, A) == pytest.approx(0.0, abs=1e-10)


@settings(max_examples=100)
@given(seed=st.integers(0, 10_000), c=st.floats(0.01, 100) | st.floats(-100, -0.01))
def test_amari_bounds_and_scale_invariance(seed, c):
    rng = np.random.default_rng(seed)
    A, B = _random_nonsingular(rng, 3), _random_nonsingular(rng, 3)
    ae = algebra.amari_error(A, B)
    assert 0.0 <= ae <= 1.0
    assert algebra.amari_error(c * A, B) == pytest.approx(ae, rel=1e-10, abs=1e-14)


def test_amari_singular():
    with pytest.raises(SingularMatrix):
        algebra.amari_error(np.zeros((2, 2)), np.eye(2))


# ---------------------------------------------------------------------------
# minimum distance index


def _mdi_grid_oracle(est, truth, grid=np.linspace(-4, 4, 16001)):
    # brute force over permutations, per-row scale on a grid
    k = est.shape[0]
    g = np.linalg.solve(est, truth)
    best = np.inf
    for perm in itertools.permutations(range(k)):
        total = 0.0
        for i, j in enumerate(perm):
            resid = (grid[:, None] * g[j][None, :] - np.eye(k)[i][None, :]) ** 2
            total += resid.sum(axis=1).min()
        best = min(best, total)
    return np.sqrt(best / (k - 1))


def test_mdi_zero_on_equivalent():
    rng = np.random.default_rng(4)
    A = _random_nonsingular(rng, 3)
    assert algebra.min_distance_index(A, A) == pytest.approx(0.0, abs=1e-7)
    P = np.eye(3)[:, [2, 0, 1]]
    D = np.diag([2.0, -0.3, 5.0])
    assert algebra.min_distance_index(A @ P @ D, A) == pytest.approx(0.0, abs=1e-7)


def test_mdi_against_grid_oracle():
    rng = np.random.default_rng(5)
    for _ in range(10):
        A = _random_nonsingular(rng, 3)
        E = rng.normal(size=(3, 3))
        est = A + 0.1 * E
        exact = algebra.min_distance_index(est, A)
        oracle = _mdi_grid_oracle(est, A)
        assert exact >= 0
        assert exact == pytest.approx(oracle, rel=0.10)
        assert exact <= oracle + 1e-12


@given(seed=st.integers(0, 10_000), k=st.integers(2, 5))
def test_mdi_assignment_matches_enumeration(seed, k):
    rng = np.random.default_rng(seed)
    a, b = _random_nonsingular(rng, k), _random_nonsingular(rng, k)
    assert algebra.min_distance_index(a, b) == pytest.approx(algebra.min_distance_index_bruteforce(a, b), abs=1e-12)


# ---------------------------------------------------------------------------
# cross-information matrix


def test_gamma_star_k2_pure_gamma():
    a = 2.7
    gs = np.array([[0.0, a], [a, 0.0]])
    G = algebra.gamma_star_matrix(np.eye(2), (gs, np.zeros((2, 2))))
    np.testing.assert_allclose(G, np.diag([a, a]))


def test_gamma_star_identity_unit_kernel_by_direct_expansion():
    k = 2
    ones = np.ones((k, k))
    G = algebra.gamma_star_matrix(np.eye(k), (ones, ones))
    # vecd order for k=2 is (m10, m01); gamma terms hit the diagonal, rho terms swap the pair
    np.testing.assert_allclose(G, np.array([[1.0, 1.0], [1.0, 1.0]]))
    E = np.eye(k)
    direct = np.zeros((k * k, k * k))
    for p in range(k):
        for q in range(k):
            if p != q:
                direct += np.kron(np.outer(E[p], E[p]), np.outer(E[q], E[q]))
                direct += np.kron(np.outer(E[p], E[q]), np.outer(E[q], E[p]))
    C = algebra.selection_matrix(k)
    np.testing.assert_allclose(G, C @ direct @ C.T)


def test_gamma_star_gaussian_matches_parametric_kernel():
    # f = g Gaussian: gamma* = rho* = 1, and the parametric kernel without its
    # scale (diagonal-pair) terms must give the same compressed matrix
    k = 3
    mom = [score_moments(Gaussian())] * k
    Gf = g_f_matrix(mom)
    E = np.eye(k)
    for j in range(k):
        Gf -= (mom[j].info_scale - 1.0) * np.kron(np.outer(E[j], E[j]), np.outer(E[j], E[j]))
    rng = np.random.default_rng(6)
    for _ in range(5):
        L = algebra.pi_normalize(_random_nonsingular(rng, k))
        M = np.kron(np.eye(k), np.linalg.inv(L))
        C = algebra.selection_matrix(k)
        ones = np.ones((k, k))
        np.testing.assert_allclose(algebra.gamma_star_matrix(L, (ones, ones)), C @ M.T @ Gf @ M @ C.T, atol=1e-6)


def test_gamma_star_singular_L():
    with pytest.raises(SingularMatrix):
        algebra.gamma_star_matrix(np.zeros((2, 2)), (np.ones((2, 2)), np.ones((2, 2))))
