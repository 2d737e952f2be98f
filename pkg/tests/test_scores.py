import numpy as np
import pytest

from rankica import algebra
from rankica.densities import Gaussian, SkewLaplace, SkewT, parse_family
from rankica.errors import DegenerateSample, DivergentMoment
from rankica.scores import (
    ScoreFamily,
    ScoreMoments,
    cross_info_factors,
    cross_info_oracle,
    fit_skew_t_mle,
    g_f_matrix,
    gamma_info_matrix,
    score_moments,
    skew_t_loglik_at_init,
)

ORACLE_SPECS = ["gauss", "laplace", "skewt(alpha=4,nu=5)", "slaplace(eta=2)"]


def test_gaussian_moments():
    m = score_moments(Gaussian())
    for got, want in [(m.s2, 1.0), (m.info_loc, 1.0), (m.info_scale, 3.0), (m.mean, 0.0), (m.kappa, 0.0)]:
        assert got == pytest.approx(want, abs=1e-6)


def test_laplace_moments():
    m = score_moments(SkewLaplace(eta=1.0))
    assert m.info_loc == pytest.approx(2.0, abs=1e-8)
    assert m.s2 == pytest.approx(1.0, abs=1e-8)  # unit-scale parameterization has variance sigma^2
    assert abs(m.mean) < 1e-10 and abs(m.kappa) < 1e-10


@pytest.mark.parametrize("spec", ["stable(beta=1,gamma=1.5)", "cauchy", "t(nu=2)"])
def test_divergent_moments(spec):
    with pytest.raises(DivergentMoment):
        score_moments(parse_family(spec))


@pytest.mark.parametrize("spec", ["gauss", "laplace", "t(nu=5)", "t(nu=3)", "skewt(alpha=4,nu=5)", "slaplace(eta=2)", "mixt3"])
def test_location_information_bound(spec):
    # Cramer-Rao for location: I_f * Var_f >= 1, equality only for the Gaussian
    m = score_moments(parse_family(spec))
    prod = m.info_loc * (m.s2 - m.mean**2)
    if spec == "gauss":
        assert prod == pytest.approx(1.0, abs=1e-8)
    else:
        assert prod > 1.0


def test_g_f_gaussian_k2_hand_expansion():
    G = g_f_matrix([score_moments(Gaussian())] * 2)
    want = np.array([[2, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 2]], dtype=float)
    np.testing.assert_allclose(G, want, atol=1e-8)


def test_g_f_symmetric_components_have_no_skew_terms():
    sym = [ScoreMoments(s2=1.3, info_loc=1.7, info_scale=4.0, mean=0.0, kappa=0.0) for _ in range(3)]
    G = g_f_matrix(sym)
    E = np.eye(3)
    base = np.zeros_like(G)
    for j in range(3):
        base += 3.0 * np.kron(np.outer(E[j], E[j]), np.outer(E[j], E[j]))
    for p in range(3):
        for q in range(3):
            if p != q:
                base += 1.7 * 1.3 * np.kron(np.outer(E[p], E[p]), np.outer(E[q], E[q]))
                base += np.kron(np.outer(E[p], E[q]), np.outer(E[q], E[p]))
    np.testing.assert_array_equal(G, base)
    for spec in ("t(nu=5)", "laplace", "gauss"):
        m = score_moments(parse_family(spec))
        assert abs(m.mean) < 1e-10 and abs(m.kappa) < 1e-10


def test_g_f_compression_at_identity():
    mom = [score_moments(parse_family(s)) for s in ("skewt(alpha=4,nu=5)", "slaplace(eta=2)", "gauss")]
    C = algebra.selection_matrix(3)
    np.testing.assert_allclose(gamma_info_matrix(np.eye(3), mom), C @ g_f_matrix(mom) @ C.T, atol=1e-12)


@pytest.mark.parametrize("spec", ORACLE_SPECS)
def test_cross_info_identities_at_f_equals_g(spec):
    fam = ScoreFamily.from_specs([spec, spec])
    m = score_moments(fam[0])
    g, r = cross_info_oracle(fam, fam, 0, 1)
    assert r == pytest.approx(1.0, abs=1e-6)
    # gamma_pq - varrho_pqq = I_p s2_q - I_p alpha_q^2
    assert g == pytest.approx(m.info_loc * (m.s2 - m.mean**2), abs=1e-6)


def test_cross_info_gaussian_reference_laplace_truth_monte_carlo():
    f = ScoreFamily.from_specs(["gauss", "gauss"])
    g = ScoreFamily.from_specs(["laplace", "laplace"])
    fac = cross_info_factors(f, g, 0, 1)
    rng = np.random.default_rng(11)
    u = rng.uniform(size=1_000_000)
    F, G = f[0], g[0]
    Finv, Ginv = F.ppf(u), G.ppf(u)
    draws = {
        "g1": F.phi(Finv) * G.phi(Ginv),
        "g2": Finv * Ginv,
        "r1": Finv * F.phi(Ginv),
        "r2": F.phi(Finv) * Ginv,
    }
    for key, x in draws.items():
        se = x.std() / np.sqrt(x.size)
        assert abs(x.mean() - fac[key]) < 3 * se, key
    gs, rs = cross_info_oracle(f, g, 0, 1)
    assert np.isfinite(gs) and np.isfinite(rs)


def test_score_family_grid_is_cached_and_centered():
    fam = ScoreFamily.from_specs(["gauss", "slaplace(eta=2)"])
    Jg, Fi, Jbar, Fbar = fam.grid(50)
    assert Jg.shape == Fi.shape == (50, 2)
    assert fam.grid(50)[0] is Jg
    np.testing.assert_allclose(Jbar, Jg.mean(axis=0))
    np.testing.assert_allclose(Fi[:, 0], -Fi[::-1, 0], atol=1e-12)


# ---------------------------------------------------------------------------
# skew-t maximum likelihood


def test_skew_t_mle_recovers_parameters():
    x = SkewT(alpha=4.0, nu=5.0).sample(5000, np.random.default_rng(21))
    p = fit_skew_t_mle(x)
    assert abs(p.alpha - 4.0) <= 1.5
    assert abs(p.nu - 5.0) <= 2.0
    assert abs(p.mu) <= 0.1
    assert abs(p.sigma - 1.0) <= 0.1
    assert p.loglik >= skew_t_loglik_at_init(x)


def test_skew_t_mle_gaussian_sample():
    x = np.random.default_rng(22).normal(size=5000)
    p = fit_skew_t_mle(x)
    assert -1.0 <= p.alpha <= 1.0
    assert p.nu >= 20.0


@pytest.mark.parametrize("spec", ["slaplace(eta=2)", "mixt3", "stable(beta=1,gamma=1.5)", "cauchy"])
def test_skew_t_mle_respects_bounds(spec):
    x = parse_family(spec).sample(1000, np.random.default_rng(23))
    p = fit_skew_t_mle(x)
    assert -15.0 <= p.alpha <= 15.0
    assert 3.0 <= p.nu <= 1000.0
    assert p.sigma > 0
    assert p.loglik >= skew_t_loglik_at_init(x) - 1e-9


def test_skew_t_mle_degenerate():
    with pytest.raises(DegenerateSample):
        fit_skew_t_mle(np.full(100, 3.0))
    with pytest.raises(DegenerateSample):
        fit_skew_t_mle(np.arange(5.0))
