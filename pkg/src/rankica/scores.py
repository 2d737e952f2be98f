"""Score bundles, score-moment functionals, information kernels and skew-t fitting."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, stats

from . import algebra
from .densities import (
    Density,
    Gaussian,
    SkewLaplace,
    SkewT,
    Stable,
    StudentT,
    _skew_t_std_logpdf,
    parse_family,
)
from .errors import (
    DegenerateSample,
    DimensionMismatch,
    DivergentMoment,
    NonConvergence,
    QuadratureFailure,
)

# ---------------------------------------------------------------------------
# score families


@dataclass(frozen=True, eq=False)
class ScoreFamily:
    """A tuple of ``k`` component densities used as reference scores.

    ``grid(n)`` returns the rank scores ``J_j(i/(n+1))`` and quantiles
    ``F_j^{-1}(i/(n+1))`` for ``i = 1..n`` together with their column means.
    Grids are cached per ``n``; the family itself never changes.
    """

    components: tuple
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def from_specs(cls, specs):
        return cls(tuple(parse_family(s) if isinstance(s, str) else s for s in specs))

    @classmethod
    def gaussian(cls, k):
        return cls(tuple(Gaussian() for _ in range(k)))

    @property
    def k(self):
        return len(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, j):
        return self.components[j]

    def grid(self, n):
        if n not in self._cache:
            u = np.arange(1, n + 1) / (n + 1.0)
            Fi = np.column_stack([c.ppf(u) for c in self.components])
            Jg = np.column_stack([c.phi(Fi[:, j]) for j, c in enumerate(self.components)])
            self._cache[n] = (Jg, Fi, Jg.mean(axis=0), Fi.mean(axis=0))
        return self._cache[n]


def location_score(component: Density, z):
    """``phi = -f'/f`` of a single component."""
    return component.phi(z)


def quantile(component: Density, u):
    return component.ppf(u)


# ---------------------------------------------------------------------------
# score moments


@dataclass(frozen=True)
class ScoreMoments:
    """Per-component moments entering the information kernel."""

    s2: float
    info_loc: float
    info_scale: float
    mean: float
    kappa: float


def _quad_once(fun, lo, hi, points, tol):
    kw = dict(limit=400, epsabs=tol, epsrel=tol)
    if points is not None and np.isfinite(lo) and np.isfinite(hi):
        return integrate.quad(fun, lo, hi, points=points, **kw)[0]
    if points is not None:
        c = points[0]
        return integrate.quad(fun, lo, c, **kw)[0] + integrate.quad(fun, c, hi, **kw)[0]
    return integrate.quad(fun, lo, hi, **kw)[0]


def _quad(fun, lo, hi, points=None):
    # tight tolerance first; relaxed retries before giving up
    for tol in (1e-11, 1e-9, 1e-7):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val = _quad_once(fun, lo, hi, points, tol)
            except integrate.IntegrationWarning as exc:
                err = exc
                continue
        if not np.isfinite(val):
            raise QuadratureFailure("non-finite integral")
        return val
    raise QuadratureFailure(str(err)) from err


def _scalar(fn):
    return lambda x: float(fn(np.asarray(x, dtype=float)))


def score_moments(component: Density) -> ScoreMoments:
    """``s^2``, ``I_f``, ``J_f``, ``alpha_f`` and ``kappa_f`` by adaptive quadrature."""
    if isinstance(component, Stable) and component.gamma < 2:
        raise DivergentMoment("stable laws with tail index below 2 have infinite variance")
    if isinstance(component, StudentT) and component.nu <= 2:
        raise DivergentMoment("Student t with nu <= 2 has infinite variance")
    if isinstance(component, Stable):
        raise DivergentMoment("no location score is implemented for stable laws")
    f = _scalar(component.pdf)
    phi = _scalar(component.phi)
    pts = [float(component.loc)]
    lo, hi = -np.inf, np.inf
    s2 = _quad(lambda z: z * z * f(z), lo, hi, pts)
    info = _quad(lambda z: phi(z) ** 2 * f(z), lo, hi, pts)
    jsc = _quad(lambda z: z * z * phi(z) ** 2 * f(z), lo, hi, pts)
    mean = _quad(lambda z: z * f(z), lo, hi, pts)
    kappa = _quad(lambda z: phi(z) ** 2 * z * f(z), lo, hi, pts)
    return ScoreMoments(s2=s2, info_loc=info, info_scale=jsc, mean=mean, kappa=kappa)


def g_f_matrix(moments) -> np.ndarray:
    """``k^2 x k^2`` information kernel assembled term by term from score moments."""
    moments = list(moments)
    k = len(moments)
    s2 = np.array([m.s2 for m in moments])
    I = np.array([m.info_loc for m in moments])
    Jm = np.array([m.info_scale for m in moments])
    a = np.array([m.mean for m in moments])
    kap = np.array([m.kappa for m in moments])
    if not np.all(np.isfinite(np.concatenate([s2, I, Jm, a, kap]))):
        raise DivergentMoment("score moments must be finite")
    gamma = np.outer(I, s2)  # gamma[p, q] = I_p s2_q
    vs = np.outer(a, kap)  # varsigma[p, q] = alpha_p kappa_q
    E = np.eye(k)

    def unit(p, q):
        return np.outer(E[p], E[q])

    G = np.zeros((k * k, k * k))
    for j in range(k):
        G += (Jm[j] - 1.0) * np.kron(unit(j, j), unit(j, j))
    for p in range(k):
        for q in range(k):
            if p == q:
                continue
            G += gamma[q, p] * np.kron(unit(p, p), unit(q, q)) + np.kron(unit(p, q), unit(q, p))
            G += np.kron(unit(p, q), vs[p, q] * unit(q, q) + vs[q, p] * unit(p, p))
            for j in range(k):
                if j != p and j != q:
                    G += I[j] * a[p] * a[q] * np.kron(unit(p, q), unit(j, j))
    return G


def gamma_info_matrix(L, moments) -> np.ndarray:
    """Parametric information ``C (I (x) L^{-1})' G_f (I (x) L^{-1}) C'``."""
    L = algebra.check_nonsingular(L, "L")
    k = L.shape[0]
    C = algebra.selection_matrix(k)
    M = np.kron(np.eye(k), np.linalg.inv(L))
    return C @ M.T @ g_f_matrix(moments) @ M @ C.T


# ---------------------------------------------------------------------------
# cross-information oracle

_EPS_U = 1e-13


_SPLIT_U = (_EPS_U, 1e-8, 1e-4, 0.02, 0.25, 0.5, 0.75, 0.98, 1 - 1e-4, 1 - 1e-8, 1 - _EPS_U)


def _breaks(g: Density):
    # quantile breakpoints keep each quad panel free of heavy tails and sharp modes
    b = np.unique(g.ppf(np.array(_SPLIT_U)))
    return np.concatenate([[-np.inf], b, [np.inf]])


def _quad_pieces(fun, breaks):
    return float(sum(_quad(fun, a, b) for a, b in zip(breaks[:-1], breaks[1:])))


def _transport(f: Density, g: Density):
    """``z -> F^{-1}(G(z))``, the identity when both laws coincide."""
    if f == g:
        return lambda z: z
    return lambda z: float(f.ppf(np.clip(g.cdf(z), _EPS_U, 1 - _EPS_U)))


def cross_info_factors(f: ScoreFamily, g: ScoreFamily, p: int, q: int):
    """The four one-dimensional integrals behind ``gamma*_{pq}`` and ``rho*_{pq}``.

    Returns a dict with keys ``g1`` (``int phi_fp(F^-1(u)) phi_gp(G^-1(u)) du``),
    ``g2`` (``int F_q^-1(u) G_q^-1(u) du``), ``r1`` (``int F_p^-1(u) phi_fp(G_p^-1(u)) du``)
    and ``r2`` (``int phi_fq(F_q^-1(u)) G_q^-1(u) du``).
    Integration is carried out in ``z = G^{-1}(u)`` coordinates.
    """
    if f.k != g.k:
        raise DimensionMismatch("score families of different sizes")
    if p == q:
        raise ValueError("p and q must differ")
    fp, gp, fq, gq = f[p], g[p], f[q], g[q]
    tp, tq = _transport(fp, gp), _transport(fq, gq)
    gpdf_p, gpdf_q = _scalar(gp.pdf), _scalar(gq.pdf)
    bp, bq = _breaks(gp), _breaks(gq)
    phi_fp, phi_fq, phi_gp = _scalar(fp.phi), _scalar(fq.phi), _scalar(gp.phi)
    g1 = _quad_pieces(lambda z: phi_fp(tp(z)) * phi_gp(z) * gpdf_p(z), bp)
    g2 = _quad_pieces(lambda z: tq(z) * z * gpdf_q(z), bq)
    r1 = _quad_pieces(lambda z: tp(z) * phi_fp(z) * gpdf_p(z), bp)
    r2 = _quad_pieces(lambda z: phi_fq(tq(z)) * z * gpdf_q(z), bq)
    return {"g1": g1, "g2": g2, "r1": r1, "r2": r2}


def _mean(d: Density):
    return _quad_pieces(lambda z: z * float(d.pdf(z)), _breaks(d))


def cross_info_oracle(f: ScoreFamily, g: ScoreFamily, p: int, q: int):
    """Analytic ``(gamma*_{pq}(f, g), rho*_{pq}(f, g))`` by quadrature."""
    fac = cross_info_factors(f, g, p, q)
    a_fq, a_gq = _mean(f[q]), _mean(g[q])
    gamma_star = fac["g1"] * (fac["g2"] - a_fq * a_gq)
    rho_star = fac["r1"] * fac["r2"]
    return gamma_star, rho_star


def cross_info_matrices(f: ScoreFamily, g: ScoreFamily):
    """All off-diagonal ``gamma*`` and ``rho*`` values as two ``k x k`` arrays."""
    k = f.k
    gs, rs = np.zeros((k, k)), np.zeros((k, k))
    for p in range(k):
        for q in range(k):
            if p != q:
                gs[p, q], rs[p, q] = cross_info_oracle(f, g, p, q)
    return gs, rs


# ---------------------------------------------------------------------------
# skew-t maximum likelihood

ALPHA_BOUND = 15.0
NU_MIN, NU_MAX = 3.0, 1000.0


@dataclass(frozen=True)
class SkewTParams:
    mu: float = 0.0
    sigma: float = 1.0
    alpha: float = 0.0
    nu: float = 5.0
    loglik: float = float("nan")

    def density(self) -> SkewT:
        return SkewT(alpha=self.alpha, nu=self.nu, loc=self.mu, scale=self.sigma)

    def as_dict(self):
        return {"mu": self.mu, "sigma": self.sigma, "alpha": self.alpha, "nu": self.nu}


def skew_t_loglik(x, mu, sigma, alpha, nu):
    z = (np.asarray(x, dtype=float) - mu) / sigma
    return float(np.sum(_skew_t_std_logpdf(z, alpha, nu)) - z.size * np.log(sigma))


def _moment_init(x):
    med = np.median(x)
    mad = stats.median_abs_deviation(x, scale="normal")
    skew = stats.skew(x)
    kurt = stats.kurtosis(x)
    alpha0 = float(np.clip(2.0 * skew, -5.0, 5.0))
    nu0 = float(np.clip(4.0 + 6.0 / kurt, NU_MIN, 50.0)) if kurt > 0 else 50.0
    # a skewed law has its mode (and scale center) on the short-tail side
    delta = alpha0 / np.sqrt(1 + alpha0**2)
    mu0 = med - 0.6 * delta * mad
    return np.array([mu0, np.log(mad), alpha0, np.log(nu0)])


def fit_skew_t_mle(sample, max_iter=4000) -> SkewTParams:
    """Maximum likelihood skew-t fit with ``|alpha| <= 15`` and ``3 <= nu <= 1000``.

    L-BFGS-B (Nelder-Mead as fallback) on ``(mu, log sigma, alpha, log nu)``
    from a moment-based start; the returned fit is never worse than the start.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 20:
        raise DegenerateSample("need at least 20 observations")
    if not np.all(np.isfinite(x)):
        raise DegenerateSample("sample contains non-finite values")
    q75, q25 = np.percentile(x, [75, 25])
    if not q75 > q25:
        raise DegenerateSample("zero interquartile range")
    theta0 = _moment_init(x)

    def nll(th):
        v = -skew_t_loglik(x, th[0], np.exp(th[1]), th[2], np.exp(th[3]))
        return v if np.isfinite(v) else 1e300

    bounds = [(None, None), (None, None), (-ALPHA_BOUND, ALPHA_BOUND), (np.log(NU_MIN), np.log(NU_MAX))]
    # quasi-Newton first; Nelder-Mead polishes when it stops early
    res = optimize.minimize(nll, theta0, method="L-BFGS-B", bounds=bounds, options=dict(maxiter=500))
    if not res.success:
        res = optimize.minimize(
            nll,
            res.x if res.fun < nll(theta0) else theta0,
            method="Nelder-Mead",
            bounds=bounds,
            options=dict(maxiter=max_iter, maxfev=2 * max_iter, xatol=1e-6, fatol=1e-9, adaptive=True),
        )
    if not res.success:
        raise NonConvergence(f"skew-t fit did not converge: {res.message}")
    f0 = nll(theta0)
    th = res.x if res.fun <= f0 else theta0
    return SkewTParams(
        mu=float(th[0]),
        sigma=float(np.exp(th[1])),
        alpha=float(np.clip(th[2], -ALPHA_BOUND, ALPHA_BOUND)),
        nu=float(np.clip(np.exp(th[3]), NU_MIN, NU_MAX)),
        loglik=-float(min(res.fun, f0)),
    )


def skew_t_loglik_at_init(sample):
    """Log-likelihood at the moment-based starting point of ``fit_skew_t_mle``."""
    x = np.asarray(sample, dtype=float).ravel()
    th = _moment_init(x)
    return skew_t_loglik(x, th[0], np.exp(th[1]), th[2], np.exp(th[3]))


__all__ = [
    "ScoreFamily",
    "ScoreMoments",
    "SkewTParams",
    "SkewLaplace",
    "cross_info_factors",
    "cross_info_matrices",
    "cross_info_oracle",
    "fit_skew_t_mle",
    "g_f_matrix",
    "gamma_info_matrix",
    "location_score",
    "quantile",
    "score_moments",
]
