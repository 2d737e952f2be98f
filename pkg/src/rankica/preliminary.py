"""Preliminary root-n consistent estimators of the mixing matrix.

Scatter functionals (covariance, fourth-order, Tyler, Huber), their
symmetrized versions, the two-scatter estimator, FOBI, symmetric FastICA
and the local discretization used before rank-based updates.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import algebra
from .errors import (
    BudgetExceeded,
    DegenerateKurtoses,
    DimensionMismatch,
    NonConvergence,
    RankDeficientData,
)

SYM_MAX_N = 5000
PAIR_CHUNK = 1_000_000  # pair differences held in memory at once


@dataclass(frozen=True)
class ScatterMatrix:
    entries: np.ndarray
    kind: str = "cov"
    n_iter: int = 0

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _as_data(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionMismatch("data must be an (n, k) array")
    return X


def _check_full_rank(R, what="data"):
    n, k = R.shape
    if n <= k:
        raise RankDeficientData(f"need n > k, got n={n}, k={k}")
    s = np.linalg.svd(R, compute_uv=False)
    if s[0] == 0 or s[-1] / s[0] < 1e-10:
        raise RankDeficientData(f"{what} do not span {k} dimensions")


def _sym(M):
    return 0.5 * (M + M.T)


def _inv_sqrt(S):
    vals, vecs = np.linalg.eigh(_sym(S))
    if vals[0] <= 0:
        raise RankDeficientData("scatter matrix is not positive definite")
    return (vecs / np.sqrt(vals)) @ vecs.T


def cov_scatter(X) -> ScatterMatrix:
    X = _as_data(X)
    R = X - X.mean(axis=0)
    _check_full_rank(R)
    return ScatterMatrix(_sym(R.T @ R / X.shape[0]), "cov")


def cov4_scatter(X) -> ScatterMatrix:
    """``(1/n) sum_i (r_i' S^{-1} r_i) r_i r_i'`` with ``r_i = X_i - Xbar`` and ``S`` the covariance."""
    X = _as_data(X)
    R = X - X.mean(axis=0)
    S = cov_scatter(X).entries
    d2 = np.einsum("ij,ij->i", R @ np.linalg.inv(S), R)
    return ScatterMatrix(_sym((R * d2[:, None]).T @ R / X.shape[0]), "cov4")


# ---------------------------------------------------------------------------
# M-estimators on a point cloud given as chunks


class _Cloud:
    """Points ``D_i`` (rows) either stored directly or as pairwise differences."""

    def __init__(self, X, center=None, pairs=False):
        self.X = X
        self.pairs = pairs
        if pairs:
            n = X.shape[0]
            self.n_points = n * (n - 1) // 2
        else:
            self.D = X - (0.0 if center is None else center)
            self.n_points = X.shape[0]

    def chunks(self):
        if not self.pairs:
            yield self.D
            return
        X = self.X
        n = X.shape[0]
        i = 0
        while i < n - 1:
            # rows i..j-1 paired with every later row
            cnt, j = 0, i
            while j < n - 1 and cnt + (n - 1 - j) <= PAIR_CHUNK:
                cnt += n - 1 - j
                j += 1
            j = max(j, i + 1)
            parts = [X[a + 1 :] - X[a] for a in range(i, j)]
            yield np.concatenate(parts, axis=0)
            i = j


def _mahal2(D, Vinv):
    return np.einsum("ij,ij->i", D @ Vinv, D)


def _m_iterate(cloud, weight, k, kind, normalize_trace, V0, tol, max_iter):
    V = V0
    for it in range(1, max_iter + 1):
        Vinv = np.linalg.inv(V)
        acc = np.zeros((k, k))
        for D in cloud.chunks():
            d2 = _mahal2(D, Vinv)
            if np.any(d2 <= 0):
                raise RankDeficientData("an observation coincides with the center")
            acc += (D * weight(d2)[:, None]).T @ D
        Vn = _sym(acc / cloud.n_points)
        if normalize_trace:
            Vn *= k / np.trace(Vn)
        if not np.all(np.isfinite(Vn)):
            raise NonConvergence(f"{kind} iteration diverged")
        delta = np.linalg.norm(Vn - V) / np.linalg.norm(V)
        V = Vn
        if delta < tol:
            return ScatterMatrix(V, kind, it)
    raise NonConvergence(f"{kind} iteration did not converge in {max_iter} steps")


def _initial_cov(cloud, k):
    acc = np.zeros((k, k))
    for D in cloud.chunks():
        acc += D.T @ D
    return _sym(acc / cloud.n_points)


def _prepare(X, center, pairs):
    X = _as_data(X)
    n, k = X.shape
    if pairs:
        if n > SYM_MAX_N:
            raise BudgetExceeded(f"symmetrization over {n} observations exceeds the budget n <= {SYM_MAX_N}")
        _check_full_rank(X - X.mean(axis=0))
        return _Cloud(X, pairs=True), k
    if center is None:
        center = np.median(X, axis=0)
    cloud = _Cloud(X, center=np.asarray(center, dtype=float))
    _check_full_rank(cloud.D, "centered data")
    return cloud, k


def tyler_scatter(X, center=None, tol=1e-9, max_iter=500, _pairs=False) -> ScatterMatrix:
    """Tyler's shape matrix, normalized to trace ``k``; default center is the componentwise median."""
    cloud, k = _prepare(X, center, _pairs)
    V0 = _initial_cov(cloud, k)
    V0 *= k / np.trace(V0)
    return _m_iterate(cloud, lambda d2: k / d2, k, "tyler", True, V0, tol, max_iter)


def huber_constants(k, q=0.9):
    """Cutoff ``c = chi2_{k,q}`` and consistency factor ``beta`` for the Huber weights."""
    c = stats.chi2.ppf(q, k)
    beta = stats.chi2.cdf(c, k + 2) + c / k * stats.chi2.sf(c, k)
    return c, beta


def huber_m_scatter(X, center=None, tol=1e-9, max_iter=500, _pairs=False) -> ScatterMatrix:
    """Huber M-estimator of scatter with weights ``min(1, chi2_{k,0.9} / d^2)``.

    Scaled by the Gaussian consistency factor so it estimates the covariance
    at the normal model.
    """
    cloud, k = _prepare(X, center, _pairs)
    c, beta = huber_constants(k)
    V0 = _initial_cov(cloud, k)
    return _m_iterate(cloud, lambda d2: np.minimum(1.0, c / d2) / beta, k, "huber", False, V0, tol, max_iter)


def symmetrize(scatter_fn, X, **kw) -> ScatterMatrix:
    """Apply ``scatter_fn`` to all ``n(n-1)/2`` pairwise differences, centered at zero."""
    X = _as_data(X)
    if X.shape[0] > SYM_MAX_N:
        raise BudgetExceeded(f"symmetrization over {X.shape[0]} observations exceeds the budget n <= {SYM_MAX_N}")
    if scatter_fn in (tyler_scatter, huber_m_scatter):
        S = scatter_fn(X, _pairs=True, **kw)
    elif scatter_fn is cov_scatter:
        cloud, k = _prepare(X, None, True)
        S = ScatterMatrix(_initial_cov(cloud, k), "cov")
    else:
        n = X.shape[0]
        iu, ju = np.triu_indices(n, 1)
        D = X[ju] - X[iu]
        S = scatter_fn(D, **kw)
    return ScatterMatrix(S.entries, "symmetrized-" + S.kind, S.n_iter)


# ---------------------------------------------------------------------------
# two-scatter estimators


def two_scatter_unmixing(SA, SB, gap_rtol=1e-6):
    """Unmixing ``B`` with ``B SA B' = I`` and ``B SB B'`` diagonal (descending)."""
    SA = np.asarray(SA, dtype=float)
    SB = np.asarray(SB, dtype=float)
    if SA.shape != SB.shape or SA.ndim != 2 or SA.shape[0] != SA.shape[1]:
        raise DimensionMismatch("scatter matrices must be square and of equal size")
    W = _inv_sqrt(SA)
    vals, vecs = np.linalg.eigh(_sym(W @ SB @ W))
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    if vals.size > 1:
        gaps = np.abs(np.diff(vals)) / np.maximum(np.abs(vals[:-1]), np.abs(vals[1:]))
        if np.min(gaps) < gap_rtol:
            raise DegenerateKurtoses("two generalized kurtoses coincide")
    return vecs.T @ W, vals


def two_scatter_estimator(SA, SB) -> np.ndarray:
    """Canonical mixing matrix from simultaneous diagonalization of two scatters."""
    B, _ = two_scatter_unmixing(SA, SB)
    return algebra.pi_normalize(np.linalg.inv(B))


def fobi(X) -> np.ndarray:
    """Two-scatter estimator based on the covariance and fourth-order scatter."""
    X = _as_data(X)
    if X.shape[1] == 1:
        return np.ones((1, 1))
    return two_scatter_estimator(cov_scatter(X), cov4_scatter(X))


def tyler_huber(X) -> np.ndarray:
    """Two-scatter estimator from symmetrized Tyler and symmetrized Huber scatters."""
    X = _as_data(X)
    if X.shape[1] == 1:
        return np.ones((1, 1))
    return two_scatter_estimator(symmetrize(tyler_scatter, X), symmetrize(huber_m_scatter, X))


SCATTERS = {
    "cov": cov_scatter,
    "cov4": cov4_scatter,
    "tyler": tyler_scatter,
    "huber": huber_m_scatter,
}


def scatter_by_name(name, X, symmetrized=None):
    """Evaluate a named scatter; ``tyler`` and ``huber`` are symmetrized by default."""
    fn = SCATTERS[name]
    if symmetrized is None:
        symmetrized = name in ("tyler", "huber")
    return symmetrize(fn, X) if symmetrized else fn(X)


# ---------------------------------------------------------------------------
# symmetric FastICA


@dataclass
class FastICAInfo:
    n_iter: int = 0
    restarted: bool = False
    flags: list = field(default_factory=list)


def _sym_decorrelate(W):
    vals, vecs = np.linalg.eigh(W @ W.T)
    return (vecs / np.sqrt(vals)) @ vecs.T @ W


def _fastica_run(Y, W, max_iter, tol):
    n = Y.shape[0]
    for it in range(1, max_iter + 1):
        G = np.tanh(Y @ W.T)  # log-cosh contrast, a = 1
        Wn = G.T @ Y / n - np.diag((1.0 - G**2).mean(axis=0)) @ W
        Wn = _sym_decorrelate(Wn)
        lim = np.max(np.abs(np.abs(np.einsum("ij,ij->i", Wn, W)) - 1.0))
        W = Wn
        if lim < tol:
            return W, it
    return None, max_iter


def fastica_symmetric(X, max_iter=200, tol=1e-4, seed=0, return_info=False):
    """Symmetric FastICA with log-cosh contrast, covariance prewhitening, identity start.

    On failure a single restart from a seeded random orthogonal matrix is
    tried (and flagged) before raising ``NonConvergence``.
    """
    X = _as_data(X)
    k = X.shape[1]
    info = FastICAInfo()
    if k == 1:
        return (np.ones((1, 1)), info) if return_info else np.ones((1, 1))
    K = _inv_sqrt(cov_scatter(X).entries)
    Y = (X - X.mean(axis=0)) @ K
    W, it = _fastica_run(Y, np.eye(k), max_iter, tol)
    info.n_iter = it
    if W is None:
        rng = np.random.default_rng(seed)
        Q, _ = np.linalg.qr(rng.standard_normal((k, k)))
        info.restarted = True
        info.flags.append("fastica_restart")
        W, it = _fastica_run(Y, Q, max_iter, tol)
        info.n_iter += it
        if W is None:
            raise NonConvergence("FastICA did not converge after a random restart")
    M = algebra.pi_normalize(np.linalg.inv(W @ K))
    return (M, info) if return_info else M


# ---------------------------------------------------------------------------
# discretization


def discretize(L_tilde, c, n) -> np.ndarray:
    """Round off-diagonal entries away from zero onto the ``(c sqrt(n))^{-1}`` grid.

    The scaled magnitude is rounded to 9 decimals before the ceiling so that
    grid points (up to floating error) stay put, which makes the map idempotent.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    L = np.array(L_tilde, dtype=float)
    m = c * np.sqrt(n)
    out = np.sign(L) * np.ceil(np.round(m * np.abs(L), 9)) / m
    np.fill_diagonal(out, np.diag(L))
    return out
