"""Residual ranks and the approximate-score rank statistic."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import algebra
from .errors import DimensionMismatch, TiesDetected


def residuals(X, mu, L):
    """Rows ``Z_i = L^{-1} (X_i - mu)`` for an ``(n, k)`` data matrix."""
    X = np.asarray(X, dtype=float)
    L = algebra.check_nonsingular(L, "L")
    if X.ndim != 2 or X.shape[1] != L.shape[0]:
        raise DimensionMismatch(f"data shape {X.shape} does not match L {L.shape}")
    mu = np.zeros(X.shape[1]) if mu is None else np.asarray(mu, dtype=float)
    return np.linalg.solve(L, (X - mu).T).T


@dataclass(frozen=True)
class ResidualRanks:
    ranks: np.ndarray  # (n, k) integers in 1..n
    n_ties: int = 0

    @property
    def n(self):
        return self.ranks.shape[0]

    @property
    def k(self):
        return self.ranks.shape[1]


def component_ranks(Z, warn=True) -> ResidualRanks:
    """Column-wise ranks (1-based); ties are broken by order of appearance."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    n, k = Z.shape
    order = np.argsort(Z, axis=0, kind="stable")
    R = np.empty((n, k), dtype=np.int64)
    cols = np.arange(k)
    R[order, cols[None, :]] = np.arange(1, n + 1)[:, None]
    srt = np.take_along_axis(Z, order, axis=0)
    n_ties = int(np.sum(srt[1:] == srt[:-1]))
    if n_ties and warn:
        warnings.warn(f"{n_ties} tied residual values broken by index order", TiesDetected, stacklevel=2)
    return ResidualRanks(R, n_ties)


@dataclass(frozen=True)
class RankStatistic:
    T: np.ndarray  # (k, k), zero diagonal
    delta: np.ndarray  # length k(k-1)


def rank_score_matrix(ranks: ResidualRanks, scores) -> np.ndarray:
    """The ``k x k`` statistic ``T`` (diagonal set to zero).

    ``T = n^{-1/2} sum_i J(R_i/(n+1)) F^{-1}(R_i/(n+1))' - n^{1/2} Jbar Fbar'``.
    """
    R = ranks.ranks
    n, k = R.shape
    if scores.k != k:
        raise DimensionMismatch(f"{scores.k} score components for {k} residual columns")
    if n < 2:
        raise DimensionMismatch("need at least two observations")
    Jg, Fi, Jbar, Fbar = scores.grid(n)
    idx = R - 1
    A = np.take_along_axis(Jg, idx, axis=0)
    B = np.take_along_axis(Fi, idx, axis=0)
    T = A.T @ B / np.sqrt(n) - np.sqrt(n) * np.outer(Jbar, Fbar)
    np.fill_diagonal(T, 0.0)
    return T


def central_sequence(T, L):
    """``C (I (x) L^{-1})' vec(T)``, computed as ``vecd_o(L^{-T} T)``."""
    L = algebra.check_nonsingular(L, "L")
    return algebra.vecd_o(np.linalg.solve(L.T, T))


def rank_statistic(ranks: ResidualRanks, scores, L) -> RankStatistic:
    T = rank_score_matrix(ranks, scores)
    return RankStatistic(T=T, delta=central_sequence(T, L))


def rank_statistic_at(X, L, scores, warn=False) -> RankStatistic:
    """Convenience: residuals at ``L`` (location-free), ranks, then ``T`` and ``delta``."""
    Z = residuals(X, None, L)
    return rank_statistic(component_ranks(Z, warn=warn), scores, L)
