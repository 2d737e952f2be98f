"""Univariate component densities with scores, CDFs, quantiles and samplers.

Every family is a location-scale law ``f(x) = g((x - loc) / scale) / scale``.
The ``F0`` constructors (``standardized=True``) choose ``loc`` so that the
median is exactly zero, which is the identification convention for sources.

Families
--------
``Gaussian``, ``StudentT``, ``SkewT`` (Azzalini-Capitanio), ``SkewLaplace``
(``eta = 1`` is the unit-variance Laplace law), ``Stable`` (S1
parameterization, sampling only) and ``MixT3`` (a bimodal Student mixture).
"""
from __future__ import annotations

import functools
import re
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import DomainError, InvalidParams, ParseError

SQRT2 = np.sqrt(2.0)


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0.0) | ~(u < 1.0)):
        raise DomainError("quantile argument must lie strictly inside (0, 1)")
    return u


def _t_logpdf(z, nu):
    return (
        special.gammaln((nu + 1) / 2)
        - special.gammaln(nu / 2)
        - 0.5 * np.log(nu * np.pi)
        - (nu + 1) / 2 * np.log1p(z * z / nu)
    )


def _t_logcdf(w, nu):
    # log T_nu(w) stable in the far left tail
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    left = w < -5.0
    out[~left] = np.log(special.stdtr(nu, w[~left]))
    if np.any(left):
        wl = w[left]
        # T(w) = I_x(nu/2, 1/2) / 2 with x = nu / (nu + w^2)
        x = nu / (nu + wl * wl)
        val = 0.5 * special.betainc(nu / 2, 0.5, x)
        with np.errstate(divide="ignore"):
            lv = np.log(val)
        bad = ~np.isfinite(lv)
        if np.any(bad):
            lv[bad] = stats.t.logcdf(wl[bad], nu)
        out[left] = lv
    return out


class Density:
    """Base class. Subclasses implement the standard (``loc=0, scale=1``) law."""

    loc: float = 0.0
    scale: float = 1.0
    name: str = "density"

    # standard-law hooks -------------------------------------------------
    def _logpdf(self, z):
        return np.log(self._pdf(z))

    def _pdf(self, z):
        return np.exp(self._logpdf(z))

    def _cdf(self, z):
        raise NotImplementedError

    def _ppf(self, u):
        raise NotImplementedError

    def _phi(self, z):
        raise NotImplementedError(f"no location score for {self.name}")

    def _rvs(self, n, rng):
        return self._ppf(rng.uniform(size=n))

    # public API ---------------------------------------------------------
    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.loc) / self.scale

    def pdf(self, x):
        return self._pdf(self._z(x)) / self.scale

    def logpdf(self, x):
        return self._logpdf(self._z(x)) - np.log(self.scale)

    def cdf(self, x):
        return self._cdf(self._z(x))

    def ppf(self, u):
        u = _check_u(u)
        return self.loc + self.scale * self._ppf(u)

    quantile = ppf

    def phi(self, x):
        """Location score ``-f'(x) / f(x)``."""
        return self._phi(self._z(x)) / self.scale

    def J(self, u):
        """Rank score ``phi(F^{-1}(u))``."""
        return self.phi(self.ppf(u))

    def sample(self, n, rng):
        """Draw ``n`` values using the ``numpy.random.Generator`` ``rng``."""
        if isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(int(rng))
        return self.loc + self.scale * self._rvs(int(n), rng)

    def median(self):
        return float(self.ppf(0.5))

    # decomposition of phi into nondecreasing pieces (assumption A5) ------
    def phi_monotone_split(self, lo=-50.0, hi=50.0, num=20001):
        """Return callables ``(up, down)``, both nondecreasing, with ``phi = up - down``.

        Built from the positive and negative variation of ``phi`` on a fine
        grid; between grid points the pieces are linearly interpolated, which
        keeps them monotone.
        """
        grid = np.linspace(lo, hi, num) * self.scale + self.loc
        vals = self.phi(grid)
        d = np.diff(vals)
        up = np.concatenate([[0.0], np.cumsum(np.maximum(d, 0.0))]) + vals[0]
        down = np.concatenate([[0.0], np.cumsum(np.maximum(-d, 0.0))])

        def f_up(x):
            return np.interp(x, grid, up)

        def f_down(x):
            return np.interp(x, grid, down)

        return f_up, f_down

    def describe(self):
        return self.name


# ---------------------------------------------------------------------------
# closed-form families


@dataclass(frozen=True)
class Gaussian(Density):
    loc: float = 0.0
    scale: float = 1.0
    name: str = field(default="gauss", repr=False)

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidParams("scale must be positive")

    def _logpdf(self, z):
        return -0.5 * z * z - 0.5 * np.log(2 * np.pi)

    def _cdf(self, z):
        return special.ndtr(z)

    def _ppf(self, u):
        return special.ndtri(u)

    def _phi(self, z):
        return np.asarray(z, dtype=float)

    def _rvs(self, n, rng):
        return rng.standard_normal(n)


@dataclass(frozen=True)
class StudentT(Density):
    nu: float = 5.0
    loc: float = 0.0
    scale: float = 1.0
    name: str = field(default="t", repr=False)

    def __post_init__(self):
        if not (self.nu > 0 and self.scale > 0):
            raise InvalidParams("nu and scale must be positive")

    def _logpdf(self, z):
        return _t_logpdf(z, self.nu)

    def _cdf(self, z):
        return special.stdtr(self.nu, z)

    def _ppf(self, u):
        return special.stdtrit(self.nu, u)

    def _phi(self, z):
        return (self.nu + 1) * z / (self.nu + z * z)

    def _rvs(self, n, rng):
        return rng.standard_t(self.nu, size=n)

    def describe(self):
        return f"t(nu={self.nu:g})"


@dataclass(frozen=True)
class SkewLaplace(Density):
    """Two-piece Laplace law; ``eta > 1`` puts the heavier tail on the left."""

    eta: float = 1.0
    loc: float = 0.0
    scale: float = 1.0
    name: str = field(default="slaplace", repr=False)

    def __post_init__(self):
        if not (self.eta > 0 and self.scale > 0):
            raise InvalidParams("eta and scale must be positive")

    @property
    def _p0(self):
        return self.eta**2 / (1 + self.eta**2)

    def _logpdf(self, z):
        z = np.asarray(z, dtype=float)
        e = self.eta
        c = np.log(SQRT2 * e / (1 + e * e))
        return c + np.where(z <= 0, SQRT2 * z / e, -SQRT2 * e * z)

    def _cdf(self, z):
        z = np.asarray(z, dtype=float)
        e = self.eta
        left = self._p0 * np.exp(SQRT2 * np.minimum(z, 0.0) / e)
        right = 1.0 - np.exp(-SQRT2 * e * np.maximum(z, 0.0)) / (1 + e * e)
        return np.where(z <= 0, left, right)

    def _ppf(self, u):
        u = np.asarray(u, dtype=float)
        e, p0 = self.eta, self._p0
        with np.errstate(divide="ignore", invalid="ignore"):
            left = e / SQRT2 * np.log(u / p0)
            right = -np.log((1.0 - u) * (1 + e * e)) / (SQRT2 * e)
        return np.where(u <= p0, left, right)

    def _phi(self, z):
        z = np.asarray(z, dtype=float)
        e = self.eta
        mid = 0.5 * (SQRT2 * e - SQRT2 / e)
        return np.where(z < 0, -SQRT2 / e, np.where(z > 0, SQRT2 * e, mid))

    def describe(self):
        return "laplace" if self.eta == 1 else f"slaplace(eta={self.eta:g})"


# ---------------------------------------------------------------------------
# tabulated CDF for laws without a closed form


_GL_T, _GL_W = np.polynomial.legendre.leggauss(12)


class _CdfTable:
    """Piecewise Gauss-Legendre tabulation of a standard CDF.

    Knots are sinh-spaced on ``[-span, span]``; tail masses beyond the
    outer knots come from adaptive quadrature to infinity.
    """

    def __init__(self, pdf, span=1e4, nknots=801, width=0.5):
        s = np.linspace(-np.arcsinh(span / width), np.arcsinh(span / width), nknots)
        self.knots = width * np.sinh(s)
        self.pdf = pdf
        a, b = self.knots[:-1], self.knots[1:]
        half = 0.5 * (b - a)
        nodes = (0.5 * (a + b))[:, None] + half[:, None] * _GL_T[None, :]
        seg = (pdf(nodes) * _GL_W[None, :]).sum(axis=1) * half
        # tail masses are tiny; quad may complain about its own error estimate
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            left_tail = integrate.quad(pdf, -np.inf, self.knots[0], epsabs=1e-15, limit=200)[0]
            right_tail = integrate.quad(pdf, self.knots[-1], np.inf, epsabs=1e-15, limit=200)[0]
        cum = left_tail + np.concatenate([[0.0], np.cumsum(seg)])
        self.total = cum[-1] + right_tail
        self.right_tail = right_tail
        self.values = cum / self.total
        self.left_tail = left_tail

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        shape = z.shape
        z = z.ravel()
        out = np.empty_like(z)
        lo = z < self.knots[0]
        hi = z > self.knots[-1]
        mid = ~(lo | hi)
        if np.any(mid):
            zm = z[mid]
            idx = np.clip(np.searchsorted(self.knots, zm, side="right") - 1, 0, len(self.knots) - 2)
            a = self.knots[idx]
            half = 0.5 * (zm - a)
            nodes = (0.5 * (a + zm))[:, None] + half[:, None] * _GL_T[None, :]
            part = (self.pdf(nodes) * _GL_W[None, :]).sum(axis=1) * half
            out[mid] = self.values[idx] + part / self.total
        for i in np.flatnonzero(lo):
            out[i] = integrate.quad(self.pdf, -np.inf, z[i], epsabs=1e-16)[0] / self.total
        for i in np.flatnonzero(hi):
            out[i] = 1.0 - integrate.quad(self.pdf, z[i], np.inf, epsabs=1e-16)[0] / self.total
        return np.clip(out, 0.0, 1.0).reshape(shape)

    def ppf(self, u, tol=1e-13, max_iter=60):
        u = np.asarray(u, dtype=float)
        shape = u.shape
        u = u.ravel()
        # bracket from the table (monotone), then safeguarded Newton
        j = np.clip(np.searchsorted(self.values, u) - 1, 0, len(self.knots) - 2)
        lo = self.knots[j].copy()
        hi = self.knots[j + 1].copy()
        vlo, vhi = self.values[j], self.values[j + 1]
        frac = np.where(vhi > vlo, (u - vlo) / np.where(vhi > vlo, vhi - vlo, 1.0), 0.5)
        x = lo + np.clip(frac, 0.0, 1.0) * (hi - lo)
        outside = (u < self.values[0]) | (u > self.values[-1])
        if np.any(outside):
            for i in np.flatnonzero(outside):
                x[i] = self._ppf_tail(u[i])
            lo[outside] = x[outside]
            hi[outside] = x[outside]
        active = ~outside
        for _ in range(max_iter):
            if not np.any(active):
                break
            xa = x[active]
            fa = self.cdf(xa) - u[active]
            lo_a, hi_a = lo[active], hi[active]
            lo_a = np.where(fa < 0, xa, lo_a)
            hi_a = np.where(fa > 0, xa, hi_a)
            dens = self.pdf(xa) / self.total
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(dens > 0, fa / dens, np.inf)
            xn = xa - step
            bad = ~np.isfinite(xn) | (xn <= lo_a) | (xn >= hi_a)
            xn = np.where(bad, 0.5 * (lo_a + hi_a), xn)
            done = (np.abs(fa) <= tol) | (np.abs(xn - xa) <= 1e-15 * (1 + np.abs(xa)))
            lo[active], hi[active] = lo_a, hi_a
            x[active] = np.where(np.abs(fa) <= tol, xa, xn)
            idx = np.flatnonzero(active)
            active[idx[done]] = False
        return x.reshape(shape)

    def _ppf_tail(self, u):
        if u < self.values[0]:
            f = lambda x: self.cdf(np.array([x]))[0] - u
            a = self.knots[0]
            b = 2 * a
            while f(b) > 0:
                b *= 2
            return optimize.brentq(f, b, a, xtol=1e-12, rtol=1e-14)
        f = lambda x: self.cdf(np.array([x]))[0] - u
        a = self.knots[-1]
        b = 2 * a
        while f(b) < 0:
            b *= 2
        return optimize.brentq(f, a, b, xtol=1e-12, rtol=1e-14)


def _skew_t_std_logpdf(z, alpha, nu):
    z = np.asarray(z, dtype=float)
    w = alpha * z * np.sqrt((nu + 1) / (nu + z * z))
    return np.log(2.0) + _t_logpdf(z, nu) + _t_logcdf(w, nu + 1)


@functools.lru_cache(maxsize=64)
def _skew_t_table(alpha, nu):
    return _CdfTable(lambda z: np.exp(_skew_t_std_logpdf(z, alpha, nu)))


@functools.lru_cache(maxsize=64)
def _skew_t_median(alpha, nu):
    return float(_skew_t_table(alpha, nu).ppf(np.array([0.5]))[0])


@dataclass(frozen=True)
class SkewT(Density):
    """Azzalini-Capitanio skew-t law with location ``loc`` and scale ``scale``."""

    alpha: float = 0.0
    nu: float = 5.0
    loc: float = 0.0
    scale: float = 1.0
    name: str = field(default="skewt", repr=False)

    def __post_init__(self):
        if not (self.scale > 0 and self.nu > 0 and np.isfinite(self.alpha)):
            raise InvalidParams("need scale > 0, nu > 0 and finite alpha")

    @property
    def _table(self):
        return _skew_t_table(float(self.alpha), float(self.nu))

    def _logpdf(self, z):
        return _skew_t_std_logpdf(z, self.alpha, self.nu)

    def _cdf(self, z):
        if self.alpha == 0:
            return special.stdtr(self.nu, z)
        return self._table.cdf(z)

    def _ppf(self, u):
        if self.alpha == 0:
            return special.stdtrit(self.nu, u)
        return self._table.ppf(u)

    def _phi(self, z):
        z = np.asarray(z, dtype=float)
        a, nu = self.alpha, self.nu
        q = nu + z * z
        w = a * z * np.sqrt((nu + 1) / q)
        ratio = np.exp(_t_logpdf(w, nu + 1) - _t_logcdf(w, nu + 1))
        dw = a * np.sqrt(nu + 1) * nu * q**-1.5
        return (nu + 1) * z / q - ratio * dw

    def _rvs(self, n, rng):
        delta = self.alpha / np.sqrt(1 + self.alpha**2)
        u0 = np.abs(rng.standard_normal(n))
        u1 = rng.standard_normal(n)
        w = rng.chisquare(self.nu, size=n)
        return (delta * u0 + np.sqrt(1 - delta**2) * u1) / np.sqrt(w / self.nu)

    def describe(self):
        return f"skewt(alpha={self.alpha:g},nu={self.nu:g})"


# ---------------------------------------------------------------------------
# stable laws (sampling and distribution functions only)


@functools.lru_cache(maxsize=32)
def _stable_median(tail, beta):
    if tail == 2.0:
        return 0.0
    return float(stats.levy_stable.ppf(0.5, tail, beta))


@dataclass(frozen=True)
class Stable(Density):
    """Stable law in the S1 parameterization; ``gamma`` is the tail index."""

    beta: float = 0.0
    gamma: float = 1.5
    loc: float = 0.0
    scale: float = 1.0
    name: str = field(default="stable", repr=False)

    def __post_init__(self):
        if not (0 < self.gamma <= 2 and -1 <= self.beta <= 1 and self.scale > 0):
            raise InvalidParams("need 0 < gamma <= 2, -1 <= beta <= 1, scale > 0")

    def _pdf(self, z):
        return stats.levy_stable.pdf(z, self.gamma, self.beta)

    def _cdf(self, z):
        if self.gamma == 2.0:
            return special.ndtr(np.asarray(z) / SQRT2)
        return stats.levy_stable.cdf(z, self.gamma, self.beta)

    def _ppf(self, u):
        if self.gamma == 2.0:
            return SQRT2 * special.ndtri(u)
        return stats.levy_stable.ppf(u, self.gamma, self.beta)

    def _rvs(self, n, rng):
        a, b = self.gamma, self.beta
        v = rng.uniform(-np.pi / 2, np.pi / 2, size=n)
        w = rng.exponential(size=n)
        if a == 1.0:
            return (2 / np.pi) * (
                (np.pi / 2 + b * v) * np.tan(v)
                - b * np.log((np.pi / 2) * w * np.cos(v) / (np.pi / 2 + b * v))
            )
        t = b * np.tan(np.pi * a / 2)
        B = np.arctan(t) / a
        S = (1 + t * t) ** (1 / (2 * a))
        return (
            S
            * np.sin(a * (v + B))
            / np.cos(v) ** (1 / a)
            * (np.cos(v - a * (v + B)) / w) ** ((1 - a) / a)
        )

    def median(self):
        return self.loc + self.scale * _stable_median(float(self.gamma), float(self.beta))

    def describe(self):
        return f"stable(beta={self.beta:g},gamma={self.gamma:g})"


# ---------------------------------------------------------------------------
# bimodal Student mixture


MIXT3_COMPONENTS = ((0.5, -2.0, 1.0), (0.5, 2.0, 0.5))  # (weight, center, scale)


def _mix_raw_pdf(x):
    x = np.asarray(x, dtype=float)
    return sum(w * np.exp(_t_logpdf((x - c) / s, 3.0)) / s for w, c, s in MIXT3_COMPONENTS)


def _mix_raw_dpdf(x):
    x = np.asarray(x, dtype=float)
    out = 0.0
    for w, c, s in MIXT3_COMPONENTS:
        z = (x - c) / s
        out = out + w * np.exp(_t_logpdf(z, 3.0)) * (-4.0 * z / (3.0 + z * z)) / s**2
    return out


def _mix_raw_cdf(x):
    x = np.asarray(x, dtype=float)
    return sum(w * special.stdtr(3.0, (x - c) / s) for w, c, s in MIXT3_COMPONENTS)


@functools.lru_cache(maxsize=1)
def _mix_standardization():
    med = optimize.brentq(lambda x: _mix_raw_cdf(x) - 0.5, -20, 20, xtol=1e-14, rtol=1e-15)
    mad = optimize.brentq(
        lambda d: _mix_raw_cdf(med + d) - _mix_raw_cdf(med - d) - 0.5, 1e-6, 50, xtol=1e-14, rtol=1e-15
    )
    return med, mad


@dataclass(frozen=True)
class MixT3(Density):
    """Equal-weight mixture of ``t_3(-2, 1)`` and ``t_3(2, 0.5)``.

    The standard law is the raw mixture shifted to median zero and divided by
    its median absolute deviation.
    """

    loc: float = 0.0
    scale: float = 1.0
    name: str = field(default="mixt3", repr=False)

    @staticmethod
    def _raw(z):
        med, mad = _mix_standardization()
        return med + mad * np.asarray(z, dtype=float), mad

    def _pdf(self, z):
        x, mad = self._raw(z)
        return _mix_raw_pdf(x) * mad

    def _cdf(self, z):
        x, _ = self._raw(z)
        return _mix_raw_cdf(x)

    def _ppf(self, u):
        u = np.asarray(u, dtype=float)
        flat = u.ravel()
        med, mad = _mix_standardization()
        out = np.array(
            [
                optimize.brentq(lambda x: _mix_raw_cdf(x) - ui, -1e3, 1e3, xtol=1e-13, rtol=1e-15)
                if 1e-6 < ui < 1 - 1e-6
                else self._ppf_far(ui)
                for ui in flat
            ]
        )
        return ((out - med) / mad).reshape(u.shape)

    @staticmethod
    def _ppf_far(ui):
        lo, hi = -1e3, 1e3
        while _mix_raw_cdf(lo) > ui:
            lo *= 10
        while _mix_raw_cdf(hi) < ui:
            hi *= 10
        return optimize.brentq(lambda x: _mix_raw_cdf(x) - ui, lo, hi, xtol=1e-12, rtol=1e-15)

    def _phi(self, z):
        x, mad = self._raw(z)
        return -_mix_raw_dpdf(x) / _mix_raw_pdf(x) * mad

    def _rvs(self, n, rng):
        med, mad = _mix_standardization()
        pick = rng.uniform(size=n) < MIXT3_COMPONENTS[0][0]
        t = rng.standard_t(3.0, size=n)
        (_, c0, s0), (_, c1, s1) = MIXT3_COMPONENTS
        x = np.where(pick, c0 + s0 * t, c1 + s1 * t)
        return (x - med) / mad

    def modes(self):
        """Locations of the two mixture centers on the standardized scale."""
        med, mad = _mix_standardization()
        return tuple((c - med) / mad for _, c, _ in MIXT3_COMPONENTS)


# ---------------------------------------------------------------------------
# median-zero constructors


def centered(d: Density) -> Density:
    """Shift ``d`` so that its median is zero, keeping the scale."""
    from dataclasses import replace

    if isinstance(d, (Gaussian, StudentT)) or (isinstance(d, SkewLaplace) and d.eta == 1):
        return replace(d, loc=0.0)
    if isinstance(d, SkewT):
        m = 0.0 if d.alpha == 0 else _skew_t_median(float(d.alpha), float(d.nu))
        return replace(d, loc=-d.scale * m)
    if isinstance(d, SkewLaplace):
        p0 = d.eta**2 / (1 + d.eta**2)
        m = d.eta / SQRT2 * np.log(0.5 / p0) if p0 >= 0.5 else -np.log(0.5 * (1 + d.eta**2)) / (SQRT2 * d.eta)
        return replace(d, loc=-d.scale * m)
    if isinstance(d, Stable):
        return replace(d, loc=-d.scale * _stable_median(float(d.gamma), float(d.beta)))
    if isinstance(d, MixT3):
        return replace(d, loc=0.0)
    raise InvalidParams(f"cannot center {d!r}")


def skew_t_pdf(x, mu=0.0, sigma=1.0, alpha=0.0, nu=5.0):
    """Skew-t density ``(2/sigma) t_nu(z) T_{nu+1}(alpha z sqrt((nu+1)/(nu+z^2)))``."""
    return SkewT(alpha=alpha, nu=nu, loc=mu, scale=sigma).pdf(x)


def skew_laplace_pdf(x, mu=0.0, sigma=1.0, eta=1.0):
    return SkewLaplace(eta=eta, loc=mu, scale=sigma).pdf(x)


# ---------------------------------------------------------------------------
# text specifications


_SPEC_RE = re.compile(r"^\s*([A-Za-z0-9_]+)\s*(?:\((.*)\))?\s*$")

_FAMILY_KEYS = {
    "gauss": set(),
    "normal": set(),
    "laplace": set(),
    "mixt3": set(),
    "t": {"nu"},
    "cauchy": set(),
    "slaplace": {"eta"},
    "skewt": {"mu", "sigma", "alpha", "nu"},
    "stable": {"beta", "gamma"},
}


def _parse_kwargs(body):
    out = {}
    if body is None or not body.strip():
        return out
    for part in body.split(","):
        if "=" not in part:
            raise ParseError(f"expected key=value, got {part.strip()!r}")
        key, val = (s.strip() for s in part.split("=", 1))
        try:
            if "/" in val:
                num, den = val.split("/", 1)
                out[key] = float(num) / float(den)
            else:
                out[key] = float(val)
        except ValueError as exc:
            raise ParseError(f"bad number {val!r} for {key}") from exc
    return out


def parse_family(text, standardize=True) -> Density:
    """Build a density from text such as ``skewt(alpha=4,nu=5)`` or ``slaplace(eta=2)``.

    With ``standardize`` (default) the law is shifted to median zero, except
    for ``skewt`` when ``mu`` is given explicitly.
    """
    m = _SPEC_RE.match(text)
    if not m:
        raise ParseError(f"cannot parse family {text!r}")
    name, body = m.group(1).lower(), m.group(2)
    if name not in _FAMILY_KEYS:
        raise ParseError(f"unknown family {name!r}")
    kw = _parse_kwargs(body)
    unknown = set(kw) - _FAMILY_KEYS[name]
    if unknown:
        raise ParseError(f"unknown parameter(s) {sorted(unknown)} for {name}")
    try:
        if name in ("gauss", "normal"):
            return Gaussian()
        if name == "laplace":
            return SkewLaplace(eta=1.0)
        if name == "mixt3":
            return MixT3()
        if name == "cauchy":
            return StudentT(nu=1.0)
        if name == "t":
            return StudentT(nu=kw.get("nu", 5.0))
        if name == "slaplace":
            d = SkewLaplace(eta=kw.get("eta", 1.0))
            return centered(d) if standardize else d
        if name == "stable":
            d = Stable(beta=kw.get("beta", 0.0), gamma=kw.get("gamma", 1.5))
            return centered(d) if standardize else d
        d = SkewT(
            alpha=kw.get("alpha", 0.0),
            nu=kw.get("nu", 5.0),
            loc=kw.get("mu", 0.0),
            scale=kw.get("sigma", 1.0),
        )
        return centered(d) if standardize and "mu" not in kw else d
    except InvalidParams as exc:
        raise ParseError(str(exc)) from exc
