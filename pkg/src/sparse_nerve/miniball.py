"""Smallest enclosing balls and ball-intersection tests in Euclidean space.

The batched routines work on stacks of small point sets (one simplex per
row). For weights ``w`` the function ``max_j |x - p_j|^2 - w_j`` is
minimized at the power center of some affinely independent subset of the
points, so every subset of size at most ``dim + 1`` is tried. The linear
algebra for each subset depends only on the points, so it is done once and
reused for every weight vector.
"""
from __future__ import annotations

import itertools
import random
from typing import List, Optional, Sequence, Tuple

import numpy as np

#: Gram matrices worse conditioned than this mark a subset as degenerate.
_MAX_COND = 1e12
#: Rows per block in the batched routines, to bound memory.
_BLOCK = 2048


class _Support:
    """Precomputed power-center solver for one vertex subset across a batch."""

    def __init__(self, P: np.ndarray, A: Tuple[int, ...]):
        self.A = A
        self.p0 = P[:, A[0]]
        if len(A) == 1:
            self.valid = np.ones(len(P), dtype=bool)
            return
        V = P[:, list(A[1:])] - self.p0[:, None, :]
        G = 2.0 * np.einsum("nid,njd->nij", V, V)
        with np.errstate(all="ignore"):
            cond = np.linalg.cond(G)
        valid = np.isfinite(cond) & (cond <= _MAX_COND)
        G[~valid] = np.eye(len(A) - 1)
        self.V = V
        self.Ginv = np.linalg.inv(G)
        self.b = np.einsum("nid,nid->ni", V, V)
        self.valid = valid

    def centers(self, W: np.ndarray, rows=slice(None)) -> np.ndarray:
        """Power centers for weights ``W`` of shape (n, m, k); returns (n, m, dim).

        ``rows`` selects the batch rows that ``W`` refers to.
        """
        A = self.A
        p0 = self.p0[rows]
        if len(A) == 1:
            return np.broadcast_to(p0[:, None, :], W.shape[:2] + p0.shape[1:])
        rhs = self.b[rows][:, None, :] - (W[:, :, list(A[1:])] - W[:, :, A[0]][:, :, None])
        y = np.einsum("nij,nmj->nmi", self.Ginv[rows], rhs)
        return p0[:, None, :] + np.einsum("nmi,nid->nmd", y, self.V[rows])


def _supports(P: np.ndarray) -> List[_Support]:
    k, dim = P.shape[1], P.shape[2]
    return [_Support(P, A) for size in range(1, min(k, dim + 1) + 1)
            for A in itertools.combinations(range(k), size)]


def _sq_dists(X: np.ndarray, P: np.ndarray) -> np.ndarray:
    """``|X[n, m] - P[n, j]|^2`` with shape (n, m, k)."""
    diff = X[:, :, None, :] - P[:, None, :, :]
    return np.einsum("nmjd,nmjd->nmj", diff, diff)


def _as_stack(P) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim == 2:
        P = P[None]
    if P.ndim != 3:
        raise ValueError(f"expected point sets of shape (n, k, dim), got {P.shape}")
    return P


def minimax_power_batch(P, W) -> Tuple[np.ndarray, np.ndarray]:
    """Minimize ``max_j |x - p_j|^2 - w_j`` for each row and weight vector.

    Parameters
    ----------
    P : array of shape (n, k, dim)
    W : array of shape (n, m, k)

    Returns
    -------
    X : ndarray of shape (n, m, dim)
        Minimizers.
    values : ndarray of shape (n, m)
        Minimum values.
    """
    P = _as_stack(P)
    W = np.asarray(W, dtype=float)
    n, m = W.shape[:2]
    best_x = np.zeros((n, m, P.shape[2]))
    best_v = np.full((n, m), np.inf)
    for sup in _supports(P):
        X = sup.centers(W)
        v = np.max(_sq_dists(X, P) - W, axis=2)
        v[~sup.valid] = np.inf
        better = v < best_v
        best_v[better] = v[better]
        best_x[better] = X[better]
    return best_x, best_v


def minimax_power(points, weights=None) -> Tuple[np.ndarray, float]:
    """Single-set version of :func:`minimax_power_batch`.

    ``x`` lies in every ball ``|x - p_j| <= sqrt(w_j)`` iff the returned
    value is at most 0.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.zeros(len(P)) if weights is None else np.asarray(weights, dtype=float)
    X, v = minimax_power_batch(P[None], w[None, None, :])
    return X[0, 0], float(v[0, 0])


def meb_radius_batch(P) -> np.ndarray:
    """Smallest enclosing ball radius of each row of a (n, k, dim) stack."""
    P = _as_stack(P)
    out = np.empty(len(P))
    for s in range(0, len(P), _BLOCK):
        blk = P[s:s + _BLOCK]
        _, v = minimax_power_batch(blk, np.zeros((len(blk), 1, blk.shape[1])))
        out[s:s + _BLOCK] = np.sqrt(np.maximum(v[:, 0], 0.0))
    return out


def meb_radius(points) -> float:
    """Radius of the smallest enclosing Euclidean ball of a small point set."""
    return float(meb_radius_batch(np.atleast_2d(np.asarray(points, dtype=float))[None])[0])


class BallStack:
    """Intersection tests for balls around the rows of a (n, k, dim) stack."""

    def __init__(self, P):
        self.P = _as_stack(P)
        self.sups = _supports(self.P)

    def meet(self, R: np.ndarray, slack: np.ndarray, rows=slice(None)) -> np.ndarray:
        """Whether the balls of radii ``R`` (n, m, k) share a point, up to ``slack`` (n, m).

        ``rows`` selects the stack rows that ``R`` refers to. A row counts as
        meeting if some support center lies within ``R_j + slack`` of every
        center ``p_j``.
        """
        W = R * R
        P = self.P[rows]
        ok = np.zeros(R.shape[:2], dtype=bool)
        for sup in self.sups:
            X = sup.centers(W, rows)
            gap = np.max(np.sqrt(_sq_dists(X, P)) - R, axis=2)
            ok |= (gap <= slack) & sup.valid[rows][:, None]
        return ok


def _circumball(R: Sequence[np.ndarray]) -> Tuple[Optional[np.ndarray], float]:
    """Smallest ball with all of R on its boundary (center in aff(R))."""
    if not R:
        return None, -1.0
    P = np.array(R)
    if len(P) == 1:
        return P[0].copy(), 0.0
    V = P[1:] - P[0]
    G = 2.0 * V @ V.T
    if np.linalg.cond(G) > _MAX_COND:
        # affinely dependent support: fall back to the widest pair
        i, j = max(itertools.combinations(range(len(P)), 2),
                   key=lambda ij: np.sum((P[ij[0]] - P[ij[1]]) ** 2))
        x = (P[i] + P[j]) / 2
    else:
        x = P[0] + np.linalg.solve(G, np.sum(V * V, axis=1)) @ V
    return x, float(np.sqrt(np.max(np.sum((P - x) ** 2, axis=1))))


def welzl(points, rng: Optional[random.Random] = None) -> Tuple[np.ndarray, float]:
    """Smallest enclosing ball by Welzl's randomized move-to-front recursion."""
    P = [np.asarray(p, dtype=float) for p in np.atleast_2d(np.asarray(points, dtype=float))]
    rng = rng or random.Random(0)
    rng.shuffle(P)
    dim = len(P[0])
    tol = 1e-12

    def mtf(m: int, R: list):
        center, r = _circumball(R)
        if len(R) == dim + 1:
            return center, r
        for i in range(m):
            p = P[i]
            if center is None or np.linalg.norm(p - center) > r * (1 + tol) + tol:
                center, r = mtf(i, R + [p])
                P.insert(0, P.pop(i))
        return center, r

    return mtf(len(P), [])


def triangle_meb_radii(A: np.ndarray, B: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Vectorized smallest-enclosing-ball radius of triangles ``(A[t], B[t], C[t])``.

    Right and obtuse triangles get half their longest side; acute ones their
    circumradius. Works in any ambient dimension.
    """
    u, v = B - A, C - A
    uu = np.einsum("ij,ij->i", u, u)
    vv = np.einsum("ij,ij->i", v, v)
    uv = np.einsum("ij,ij->i", u, v)
    ww = uu + vv - 2 * uv
    sides = np.stack([uu, vv, ww], axis=1)
    longest = sides.max(axis=1)
    obtuse = 2 * longest >= sides.sum(axis=1)
    out = np.sqrt(longest) / 2
    acute = ~obtuse
    denom = uu[acute] * vv[acute] - uv[acute] ** 2
    out[acute] = np.sqrt(uu[acute] * vv[acute] * ww[acute] / (4 * denom))
    return out
