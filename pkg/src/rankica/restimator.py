"""Cross-information line search and one-step / multistep R-estimation."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import algebra
from .densities import Gaussian
from .errors import (
    AmbiguousOrdering,
    DegenerateSample,
    DimensionMismatch,
    NonConvergence,
    SingularMatrix,
    SingularUpdate,
)
from .preliminary import discretize
from .ranks import RankStatistic, component_ranks, rank_score_matrix, residuals
from .scores import ScoreFamily, fit_skew_t_mle

log = logging.getLogger(__name__)

DEFAULT_C = 20.0
DEFAULT_LAMBDA_MAX = 10.0
C3_RATIO = 1e-4
DENOM_FLOOR = 1e-8
MAX_HALVINGS = 10


def T_at(X, L, scores) -> np.ndarray:
    """Rank statistic ``T`` with residuals computed at ``L`` (location drops out of ranks)."""
    Z = residuals(X, None, L)
    return rank_score_matrix(component_ranks(Z, warn=False), scores)


# ---------------------------------------------------------------------------
# perturbations and h-mappings


def perturbed_matrix(L_tilde, T, r, s, lam, n, which="gamma"):
    """``L + n^{-1/2} lam t L (e_r e_s' - diag(L e_r e_s'))`` with ``t = T_rs`` (gamma) or ``T_sr`` (rho)."""
    if r == s:
        raise ValueError("r and s must differ")
    L = np.asarray(L_tilde, dtype=float)
    T = np.asarray(T.T if isinstance(T, RankStatistic) else T, dtype=float)
    k = L.shape[0]
    t = T[r, s] if which == "gamma" else T[s, r]
    E = np.zeros((k, k))
    E[r, s] = 1.0
    P = E - np.diag(np.diag(L @ E))
    return L + (lam * t / np.sqrt(n)) * (L @ P)


def h_mapping(L_tilde, scores, data, r, s, lam, which="gamma", T0=None):
    """``T_rs(L) * T_rs(L_lam)`` (gamma) or ``T_sr(L) * T_sr(L_lam)`` (rho)."""
    X = np.asarray(data, dtype=float)
    n = X.shape[0]
    if T0 is None:
        T0 = T_at(X, L_tilde, scores)
    i, j = (r, s) if which == "gamma" else (s, r)
    if lam == 0:
        return float(T0[i, j] ** 2)
    Lp = perturbed_matrix(L_tilde, T0, r, s, lam, n, which)
    return float(T0[i, j] * T_at(X, Lp, scores)[i, j])


@dataclass(frozen=True)
class LineSearchResult:
    value: float  # estimated cross-information quantity (inverse of the root)
    root: float
    lam_minus: float
    lam_plus: float
    status: str  # ok | no_sign_change | singular_bracket
    n_eval: int


def line_search_root(h, c=DEFAULT_C, lambda_max=DEFAULT_LAMBDA_MAX) -> LineSearchResult:
    """Locate the first sign change of ``h`` on the grid ``j / c`` and interpolate.

    ``lam_plus`` is the first grid point with ``h < 0`` and ``lam_minus`` the
    last grid point before it with ``h > 0``; the root is the linear
    interpolation between the two.  Without a sign change up to
    ``lambda_max`` the result falls back to ``1 / lambda_max``.
    """
    if not (c > 0 and lambda_max > 0):
        raise ValueError("c and lambda_max must be positive")
    jmax = int(np.floor(lambda_max * c + 1e-9))
    lam_m, h_m = None, None
    for j in range(jmax + 1):
        lam = j / c
        try:
            v = h(lam)
        except (SingularMatrix, np.linalg.LinAlgError):
            if lam_m is None:
                break
            return LineSearchResult(1.0 / lam, lam, lam_m, lam, "singular_bracket", j + 1)
        if v > 0:
            lam_m, h_m = lam, v
        elif v < 0:
            if lam_m is None:
                break
            root = lam_m + (lam - lam_m) * h_m / (h_m - v)
            return LineSearchResult(1.0 / root, root, lam_m, lam, "ok", j + 1)
    return LineSearchResult(1.0 / lambda_max, lambda_max, np.nan, np.nan, "no_sign_change", jmax + 1)


# ---------------------------------------------------------------------------
# cross-information estimates


@dataclass
class CrossInfoEstimates:
    gamma_star: np.ndarray
    rho_star: np.ndarray
    c: float = DEFAULT_C
    lambda_max: float = DEFAULT_LAMBDA_MAX
    flags: dict = field(default_factory=dict)  # (which, r, s) -> status
    brackets: dict = field(default_factory=dict)  # (which, r, s) -> (lam_minus, lam_plus)

    def usable(self, p, q):
        vals = (self.gamma_star[p, q], self.gamma_star[q, p], self.rho_star[p, q], self.rho_star[q, p])
        return all(np.isfinite(v) for v in vals)

    def flagged(self):
        return {k: v for k, v in self.flags.items() if v != "ok"}


def c3_guard(T, ratio=C3_RATIO):
    """Boolean ``k x k`` mask of off-diagonal entries of ``T`` too small to calibrate on."""
    T = np.asarray(T, dtype=float)
    off = ~np.eye(T.shape[0], dtype=bool)
    med = np.median(np.abs(T[off])) if off.any() else 0.0
    return off & (np.abs(T) < ratio * med) | (off & (T == 0))


def estimate_cross_info(L_tilde, scores, data, c=DEFAULT_C, lambda_max=DEFAULT_LAMBDA_MAX, T0=None):
    """All ``2k(k-1)`` cross-information quantities by grid line search on the h-mappings."""
    X = np.asarray(data, dtype=float)
    L = np.asarray(L_tilde, dtype=float)
    k = L.shape[0]
    if T0 is None:
        T0 = T_at(X, L, scores)
    weak = c3_guard(T0)
    gs = np.zeros((k, k))
    rs = np.zeros((k, k))
    ci = CrossInfoEstimates(gs, rs, c, lambda_max)
    for r in range(k):
        for s in range(k):
            if r == s:
                continue
            for which, out, (i, j) in (("gamma", gs, (r, s)), ("rho", rs, (s, r))):
                key = (which, r, s)
                if weak[i, j]:
                    out[r, s] = np.nan
                    ci.flags[key] = "c3_guard"
                    continue
                res = line_search_root(
                    lambda lam, w=which: h_mapping(L, scores, X, r, s, lam, w, T0), c, lambda_max
                )
                out[r, s] = res.value
                ci.flags[key] = res.status
                ci.brackets[key] = (res.lam_minus, res.lam_plus)
    return ci


# ---------------------------------------------------------------------------
# one-step update


@dataclass
class OneStepResult:
    estimate: np.ndarray
    raw: np.ndarray = None  # update before canonical re-normalization
    alpha_hat: np.ndarray = None
    beta_hat: np.ndarray = None
    N_hat: np.ndarray = None
    T: np.ndarray = None
    steps: int = 0
    trace: list = field(default_factory=list)  # amari error per step when truth is known
    estimates: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)


def update_coefficients(ci: CrossInfoEstimates, floor=DENOM_FLOOR):
    """``alpha_pq = g_pq / D_pq`` and ``beta_pq = -r_pq / D_pq`` with ``D_pq = g_pq g_qp - r_pq r_qp``.

    Pairs with missing inputs or ``|D_pq| < floor`` get zero coefficients and a flag.
    """
    gs, rs = ci.gamma_star, ci.rho_star
    k = gs.shape[0]
    A = np.zeros((k, k))
    B = np.zeros((k, k))
    flags = []
    for p in range(k):
        for q in range(k):
            if p == q:
                continue
            if not ci.usable(p, q):
                flags.append(f"pair_skipped({p},{q})")
                continue
            D = gs[p, q] * gs[q, p] - rs[p, q] * rs[q, p]
            if abs(D) < floor:
                flags.append(f"small_denominator({p},{q})")
                continue
            A[p, q] = gs[p, q] / D
            B[p, q] = -rs[p, q] / D
    return A, B, flags


def one_step(L_tilde, scores, data, ci: CrossInfoEstimates, T0=None) -> OneStepResult:
    """``L + n^{-1/2} L [N - diag(L N)]`` with ``N = (A' * T) + (B' * T')``, then canonical form."""
    X = np.asarray(data, dtype=float)
    L = np.asarray(L_tilde, dtype=float)
    n = X.shape[0]
    if T0 is None:
        T0 = T_at(X, L, scores)
    A, B, flags = update_coefficients(ci)
    N = A.T * T0 + B.T * T0.T
    scale = 1.0
    for _ in range(MAX_HALVINGS + 1):
        Ns = scale * N
        LN = L @ Ns
        raw = L + (L @ (Ns - np.diag(np.diag(LN)))) / np.sqrt(n)
        try:
            est = algebra.pi_normalize(raw)
            break
        except (SingularMatrix, AmbiguousOrdering):
            scale *= 0.5
            flags.append("step_halved")
    else:
        raise SingularUpdate("update stayed singular after repeated step halving")
    return OneStepResult(est, raw, A, B, N, T0, steps=1, flags=flags)


def one_step_gamma_form(L_tilde, ci: CrossInfoEstimates, delta, n):
    """Off-diagonal update ``vecd(L) + n^{-1/2} Gamma*^{-1} delta`` (no canonical step)."""
    G = algebra.gamma_star_matrix(L_tilde, ci)
    return algebra.vecd_o(L_tilde) + np.linalg.solve(G, delta) / np.sqrt(n)


# ---------------------------------------------------------------------------
# data-driven multistep estimator


def fit_score_family(Z, flags=None):
    """Skew-t maximum likelihood scores per residual column, Gaussian on failure."""
    comps, params = [], []
    # sorted columns make the fit independent of observation order
    Z = np.sort(Z, axis=0)
    for j in range(Z.shape[1]):
        try:
            p = fit_skew_t_mle(Z[:, j])
            comps.append(p.density())
            params.append(p.as_dict())
        except (DegenerateSample, NonConvergence) as exc:
            log.info("skew-t fit failed for component %d: %s", j, exc)
            if flags is not None:
                flags.append(f"gauss_fallback({j})")
            sd = float(np.std(Z[:, j])) or 1.0
            comps.append(Gaussian(loc=float(np.median(Z[:, j])), scale=sd))
            params.append({"gaussian": True, "scale": sd})
    return ScoreFamily(tuple(comps)), params


def r_step(X, L, scores="skewt", c=DEFAULT_C, lambda_max=DEFAULT_LAMBDA_MAX):
    """One iteration: residual scores, rank statistic, cross-information and update."""
    flags = []
    if isinstance(scores, ScoreFamily):
        fam, params = scores, None
    elif scores in ("skewt", "data"):
        Z = residuals(X, None, L)
        Z = Z - np.median(Z, axis=0)
        fam, params = fit_score_family(Z, flags)
    elif scores in ("gauss", "gaussian", "vdw"):
        fam, params = ScoreFamily.gaussian(L.shape[0]), None
    else:
        raise ValueError(f"unknown score choice {scores!r}")
    T0 = T_at(X, L, fam)
    ci = estimate_cross_info(L, fam, X, c, lambda_max, T0)
    res = one_step(L, fam, X, ci, T0)
    res.flags = flags + [f"{w}({r},{s}):{v}" for (w, r, s), v in ci.flagged().items()] + res.flags
    diag = {
        "T": T0.tolist(),
        "gamma_star": np.where(np.isfinite(ci.gamma_star), ci.gamma_star, None).tolist(),
        "rho_star": np.where(np.isfinite(ci.rho_star), ci.rho_star, None).tolist(),
        "brackets": {f"{w}({r},{s})": list(v) for (w, r, s), v in ci.brackets.items()},
        "flags": res.flags,
        "scores": params,
    }
    return res, diag


def data_driven_r_estimator(
    X,
    prelim,
    steps=1,
    c=DEFAULT_C,
    lambda_max=DEFAULT_LAMBDA_MAX,
    seed=None,
    truth=None,
    scores="skewt",
    discretize_c=DEFAULT_C,
) -> OneStepResult:
    """Multistep R-estimator started from a preliminary canonical mixing matrix.

    The preliminary is first discretized on the ``(c sqrt(n))^{-1}`` grid. Each
    step refits skew-t scores to the current residuals, recomputes the rank
    statistic and the cross-information estimates and applies the one-step
    update.  ``steps = 0`` returns ``prelim`` untouched.  ``seed`` is accepted
    for interface symmetry; the procedure itself is deterministic.
    """
    X = np.asarray(X, dtype=float)
    prelim = np.asarray(prelim, dtype=float)
    n, k = X.shape
    if prelim.shape != (k, k):
        raise DimensionMismatch(f"preliminary {prelim.shape} does not match data with k={k}")
    out = OneStepResult(estimate=prelim.copy(), steps=0)
    out.estimates.append(prelim.copy())
    if truth is not None:
        out.trace.append(algebra.amari_error(prelim, truth))
    if steps <= 0 or k == 1:
        return out
    L = discretize(prelim, discretize_c, n) if discretize_c else prelim
    for t in range(1, steps + 1):
        res, diag = r_step(X, L, scores, c, lambda_max)
        L = res.estimate
        diag["step"] = t
        out.diagnostics.append(diag)
        out.flags.extend(f"step{t}:{f}" for f in res.flags)
        out.estimates.append(L.copy())
        if truth is not None:
            out.trace.append(algebra.amari_error(L, truth))
        out.alpha_hat, out.beta_hat, out.N_hat, out.T, out.raw = (
            res.alpha_hat,
            res.beta_hat,
            res.N_hat,
            res.T,
            res.raw,
        )
    out.estimate = L
    out.steps = steps
    return out


def diagnostics_json(result: OneStepResult, path=None):
    """Per-step diagnostics (brackets, flags, T, fitted score parameters) as JSON."""
    payload = {
        "steps": result.steps,
        "estimate": np.asarray(result.estimate).tolist(),
        "trace": result.trace,
        "flags": result.flags,
        "per_step": result.diagnostics,
    }
    text = json.dumps(payload, indent=2, default=float)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
