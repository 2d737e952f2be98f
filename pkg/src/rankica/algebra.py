"""Canonical form of mixing matrices, diagonal-free vectorization and error metrics.

Mixing matrices are plain ``(k, k)`` float arrays.  A matrix is *canonical*
when ``pi_normalize`` maps it to itself: unit diagonal, and in every row the
diagonal entry strictly dominates (in absolute value, after unit-norm column
scaling) every entry to its right.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AmbiguousOrdering, DimensionMismatch, SingularMatrix

DET_FLOOR = 1e-12
TIE_RTOL = 1e-12


def _square(m, name="matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    return m


def check_nonsingular(m, name="matrix"):
    """Raise ``SingularMatrix`` unless ``m`` is numerically invertible."""
    m = _square(m, name)
    k = m.shape[0]
    if k == 0:
        raise DimensionMismatch(f"{name} is empty")
    # scale-free test: smallest singular value relative to the largest
    s = np.linalg.svd(m, compute_uv=False)
    if not np.all(np.isfinite(s)) or s[0] == 0.0 or s[-1] / s[0] < DET_FLOOR:
        raise SingularMatrix(f"{name} is singular (condition number too large)")
    return m


def dominance_permutation(m):
    """Column order used by the canonical form.

    Columns are scaled to unit Euclidean norm; then, row by row, the remaining
    column with the largest absolute entry in that row is placed on the
    diagonal.  Returns the list of original column indices in their new order.
    """
    m = _square(m)
    k = m.shape[0]
    scaled = np.abs(m / np.linalg.norm(m, axis=0))
    remaining = list(range(k))
    order = []
    for i in range(k - 1):
        vals = scaled[i, remaining]
        j = int(np.argmax(vals))
        best = vals[j]
        others = np.delete(vals, j)
        if others.size and np.max(others) >= best * (1.0 - TIE_RTOL):
            raise AmbiguousOrdering(
                f"dominance tie in row {i}: {best!r} vs {np.max(others)!r}"
            )
        order.append(remaining.pop(j))
    order.extend(remaining)
    return order


def pi_normalize(m):
    """Map a nonsingular matrix to the canonical representative of its class.

    The class is ``{m @ D1 @ P @ D2}`` over permutations ``P`` and nonsingular
    diagonals ``D1``, ``D2``.  Column scaling only matters for choosing the
    permutation, so the result is computed as ``m[:, order]`` divided
    column-wise by its diagonal, which makes the map exactly idempotent.
    """
    m = check_nonsingular(m)
    order = dominance_permutation(m)
    mp = m[:, order]
    return mp / np.diag(mp)


def is_canonical(m, rtol=1e-9):
    m = _square(m)
    try:
        return np.allclose(pi_normalize(m), m, rtol=rtol, atol=rtol)
    except (SingularMatrix, AmbiguousOrdering):
        return False


def odiag(m):
    """Copy of ``m`` with the diagonal set to zero."""
    m = np.array(m, dtype=float)
    np.fill_diagonal(m, 0.0)
    return m


def vecd_o(m):
    """Stack the columns of ``m`` omitting diagonal entries (length ``k(k-1)``)."""
    m = _square(m)
    k = m.shape[0]
    return m.T[~np.eye(k, dtype=bool)].copy()


def matd_o(v, k=None):
    """Inverse of ``vecd_o``: zero-diagonal ``(k, k)`` matrix from a vector."""
    v = np.asarray(v, dtype=float).ravel()
    if k is None:
        # k(k-1) = len(v)
        k = int(round((1 + np.sqrt(1 + 4 * v.size)) / 2))
    if k * (k - 1) != v.size:
        raise DimensionMismatch(f"length {v.size} is not k(k-1) for k={k}")
    out = np.zeros((k, k))
    out.T[~np.eye(k, dtype=bool)] = v
    return out


def vec(m):
    """Column-major vectorization."""
    return np.asarray(m, dtype=float).ravel(order="F")


def selection_matrix(k):
    """The ``k(k-1) x k^2`` binary matrix with ``C @ vec(M) == vecd_o(M)``.

    Built term by term from ``sum_p sum_q e_p e_p' (x) u_q e'_{q + [q >= p]}``.
    """
    C = np.zeros((k * (k - 1), k * k))
    eye_k = np.eye(k)
    eye_km1 = np.eye(k - 1) if k > 1 else np.zeros((0, 0))
    for p in range(k):
        for q in range(k - 1):
            shifted = q + 1 if q >= p else q
            C += np.kron(
                np.outer(eye_k[p], eye_k[p]),
                np.outer(eye_km1[q], eye_k[shifted]),
            )
    return C


def amari_error(a, b):
    """Amari error of ``a`` with respect to ``b``, computed on ``W = b^{-1} a``.

    Zero exactly when ``W`` is a scaled permutation; always in ``[0, 1]``.
    """
    a = check_nonsingular(a, "a")
    b = check_nonsingular(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    k = a.shape[0]
    if k == 1:
        return 0.0
    w = np.abs(np.linalg.solve(b, a))
    rows = np.sum(w.sum(axis=1) / w.max(axis=1) - 1.0)
    cols = np.sum(w.sum(axis=0) / w.max(axis=0) - 1.0)
    return float((rows + cols) / (2.0 * k * (k - 1)))


def _mdi_costs(g):
    # cost[j, i]: residual of the best multiple of row j of g approximating e_i
    sq = g**2
    return 1.0 - sq / sq.sum(axis=1, keepdims=True)


def min_distance_index(est, truth):
    """Minimum distance index between an estimated and a true mixing matrix.

    ``(k-1)^{-1/2} * min_{C = P D} ||C @ est^{-1} @ truth - I||_F``.  For a fixed
    permutation the optimal row scales are explicit, and the remaining
    minimization over permutations is a linear assignment problem.
    """
    est = check_nonsingular(est, "est")
    truth = check_nonsingular(truth, "truth")
    if est.shape != truth.shape:
        raise DimensionMismatch(f"shapes differ: {est.shape} vs {truth.shape}")
    k = est.shape[0]
    if k == 1:
        return 0.0
    g = np.linalg.solve(est, truth)
    cost = _mdi_costs(g)
    rows, cols = linear_sum_assignment(cost)
    total = max(cost[rows, cols].sum(), 0.0)
    return float(np.sqrt(total / (k - 1)))


def min_distance_index_bruteforce(est, truth):
    """Same value as ``min_distance_index`` by enumerating all ``k!`` permutations."""
    est = check_nonsingular(est, "est")
    truth = check_nonsingular(truth, "truth")
    k = est.shape[0]
    if k == 1:
        return 0.0
    cost = _mdi_costs(np.linalg.solve(est, truth))
    best = min(
        sum(cost[perm[i], i] for i in range(k))
        for perm in itertools.permutations(range(k))
    )
    return float(np.sqrt(max(best, 0.0) / (k - 1)))


def gamma_tilde(gamma_star, rho_star):
    """``k^2 x k^2`` cross-information kernel.

    ``sum_{p != q} gamma*_{qp} (e_p e_p' (x) e_q e_q') + rho*_{pq} (e_p e_q' (x) e_q e_p')``
    where ``gamma_star[r, s]`` holds the quantity attached to entry ``(r, s)``
    of the rank statistic.
    """
    gamma_star = np.asarray(gamma_star, dtype=float)
    rho_star = np.asarray(rho_star, dtype=float)
    k = gamma_star.shape[0]
    eye = np.eye(k)
    G = np.zeros((k * k, k * k))
    for p in range(k):
        for q in range(k):
            if p == q:
                continue
            G += gamma_star[q, p] * np.kron(np.outer(eye[p], eye[p]), np.outer(eye[q], eye[q]))
            G += rho_star[p, q] * np.kron(np.outer(eye[p], eye[q]), np.outer(eye[q], eye[p]))
    return G


def gamma_star_matrix(L, ci):
    """Cross-information matrix ``C (I (x) L^{-1})' G~ (I (x) L^{-1}) C'``.

    ``ci`` is anything with ``gamma_star`` and ``rho_star`` ``(k, k)`` arrays
    (e.g. ``CrossInfoEstimates``) or a ``(gamma_star, rho_star)`` pair.
    """
    L = check_nonsingular(L, "L")
    if isinstance(ci, tuple):
        gs, rs = ci
    else:
        gs, rs = ci.gamma_star, ci.rho_star
    gs = np.asarray(gs, dtype=float)
    rs = np.asarray(rs, dtype=float)
    k = L.shape[0]
    if gs.shape != (k, k) or rs.shape != (k, k):
        raise DimensionMismatch("cross-information arrays must be (k, k)")
    off = ~np.eye(k, dtype=bool)
    if not (np.all(np.isfinite(gs[off])) and np.all(np.isfinite(rs[off]))):
        raise ValueError("cross-information estimates must be finite off the diagonal")
    C = selection_matrix(k)
    M = np.kron(np.eye(k), np.linalg.inv(L))
    return C @ M.T @ gamma_tilde(gs, rs) @ M @ C.T


def random_equivalent(m, rng, scale_range=(0.2, 5.0)):
    """Draw ``m @ D1 @ P @ D2`` for random sign-mixed diagonals and permutation."""
    m = _square(m)
    k = m.shape[0]

    def diag():
        mags = rng.uniform(*scale_range, size=k)
        return np.diag(mags * rng.choice([-1.0, 1.0], size=k))

    P = np.eye(k)[:, rng.permutation(k)]
    return m @ diag() @ P @ diag()
