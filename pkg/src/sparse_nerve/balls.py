"""Truncated, capped balls over a greedy permutation.

Every point of greedy rank ``i`` grows a ball whose radius follows the
scale ``alpha`` until it hits the cap ``lam[i] * (1 + eps) / eps``; the ball
is dropped altogether once ``alpha`` passes ``lam[i] * (1 + eps)**2 / eps``
(the removal time). All quantities here are indexed by greedy rank.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .greedy import GreedyPermutation, greedy_permutation
from .metric import EMPTY, MetricKind, PointCloud, contains_exact, distances_to


@dataclass(frozen=True, eq=False)
class SparseParams:
    """Sparsity constant plus the cloud and its greedy permutation.

    ``points`` and ``lam`` are stored in greedy order. ``epsilon`` must lie
    in (0, 1); pass ``allow_large_epsilon=True`` to accept values >= 1, for
    which every formula is still well defined.
    """

    epsilon: float
    cloud: PointCloud
    gp: GreedyPermutation
    allow_large_epsilon: bool = False
    points: np.ndarray = field(init=False, repr=False)
    lam: np.ndarray = field(init=False, repr=False)
    caps: np.ndarray = field(init=False, repr=False)
    removal: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        eps = float(self.epsilon)
        if not eps > 0 or not math.isfinite(eps):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if eps >= 1 and not self.allow_large_epsilon:
            raise ValueError(f"epsilon must be < 1 (got {eps}); set allow_large_epsilon to override")
        if self.gp.n != self.cloud.n:
            raise ValueError("greedy permutation does not match the cloud")
        object.__setattr__(self, "epsilon", eps)
        pts = self.cloud.points[self.gp.order]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        lam = np.asarray(self.gp.lam, dtype=float)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "caps", lam * (1 + eps) / eps)
        object.__setattr__(self, "removal", lam * (1 + eps) ** 2 / eps)

    @classmethod
    def from_points(cls, points, epsilon: float, metric="l2", seed: int = 0,
                    allow_large_epsilon: bool = False) -> "SparseParams":
        cloud = points if isinstance(points, PointCloud) else PointCloud(points, metric)
        return cls(epsilon, cloud, greedy_permutation(cloud, seed), allow_large_epsilon)

    @property
    def n(self) -> int:
        return self.cloud.n

    @property
    def metric(self) -> MetricKind:
        return self.cloud.metric

    def dist(self, i: int, j: int) -> float:
        """Distance between greedy ranks ``i`` and ``j``."""
        return float(distances_to(self.points[i:i + 1], self.points[j], self.metric)[0])

    def dists_from(self, i: int, idx) -> np.ndarray:
        return distances_to(self.points[idx], self.points[i], self.metric)

    def point_dist(self, i: int, x) -> float:
        return float(distances_to(np.asarray(x, dtype=float)[None, :], self.points[i], self.metric)[0])


@dataclass(frozen=True)
class ConePoint:
    """A point ``x`` at scale ``delta``, one dimension above the cloud."""

    x: tuple
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("cone points live at non-negative scales")


def radius(params: SparseParams, i: int, alpha: float) -> float:
    cap = params.caps[i]
    return alpha if alpha <= cap else float(cap)


def removal_time(params: SparseParams, i: int) -> float:
    return float(params.removal[i])


def ball_radius_or_empty(params: SparseParams, i: int, alpha: float) -> float:
    """``radius(i, alpha)`` while the ball exists, :data:`EMPTY` afterwards."""
    if alpha <= params.removal[i]:
        return radius(params, i, alpha)
    return EMPTY


def _exact_radius(params: SparseParams, i: int, delta: Fraction):
    """Radius in rational arithmetic, treating the stored floats as exact."""
    lam = params.lam[i]
    if lam == math.inf:
        return delta
    eps = Fraction(params.epsilon)
    lam = Fraction(float(lam))
    if delta > lam * (1 + eps) ** 2 / eps:
        return EMPTY
    return min(delta, lam * (1 + eps) / eps)


def cone_contains(params: SparseParams, i: int, cp: ConePoint, alpha: float,
                  exact: bool = False) -> bool:
    """Membership of ``(x, delta)`` in the cone of rank ``i`` truncated at ``alpha``.

    With ``exact=True`` the test runs in rational arithmetic, reading every
    float input as the rational it represents.
    """
    if exact:
        delta = Fraction(cp.delta)
        if math.isfinite(alpha) and delta > Fraction(alpha):
            return False
        r = _exact_radius(params, i, delta)
        return contains_exact(params.points[i], r, cp.x, params.metric)
    if cp.delta > alpha:
        return False
    r = ball_radius_or_empty(params, i, cp.delta)
    if r == EMPTY:
        return False
    return params.point_dist(i, cp.x) <= r


def covering_witness(params: SparseParams, j: int, beta: float) -> int:
    """A rank whose ball at scale ``beta`` swallows the ball of ``j``.

    Returns ``j`` while ``j``'s ball still exists at ``beta``. Otherwise
    returns the nearest point to ``j`` among the ranks whose insertion
    radius is at least ``eps * beta / (1 + eps)``.
    """
    if beta < params.removal[j]:
        return j
    eps = params.epsilon
    t = eps * beta / (1 + eps)
    # lam is non-increasing, so the qualifying ranks form a prefix.
    m = int(np.searchsorted(-params.lam, -t, side="right"))
    m = max(m, 1)
    d = params.dists_from(j, slice(0, m))
    return int(np.argmin(d))


def perturbed_offsets_contains(params: SparseParams, x, alpha: float) -> bool:
    """Is ``x`` in the union of the truncated balls at scale ``alpha``?

    The union of capped balls (without truncation) is the same set; the
    two forms are cross-checked when assertions are enabled.
    """
    x = np.asarray(x, dtype=float)
    d = distances_to(params.points, x, params.metric)
    r = np.minimum(alpha, params.caps)
    alive = alpha <= params.removal
    inside = bool(np.any(alive & (d <= r)))
    if __debug__:
        untruncated = bool(np.any(d <= r))
        assert inside == untruncated, "truncated and capped unions disagree"
    return inside


def witness_contains(params: SparseParams, j: int, beta: float, x) -> Optional[int]:
    """Witness for ``j`` at ``beta`` if its ball at ``beta`` contains ``x``, else None."""
    i = covering_witness(params, j, beta)
    r = ball_radius_or_empty(params, i, beta)
    if r != EMPTY and params.point_dist(i, x) <= r:
        return i
    return None


def _sample_in_ball(rng, center, r, metric, boundary: bool):
    """A point at distance <= r from ``center`` (on the sphere if ``boundary``)."""
    d = len(center)
    u = rng.standard_normal(d)
    if metric is MetricKind.L1:
        u = rng.laplace(size=d)
    scale = float(distances_to(u[None, :], np.zeros(d), metric)[0]) or 1.0
    t = 1.0 if boundary else rng.random() ** (1.0 / d)
    x = center + u * (r * t / scale)
    # pull rounded-out boundary samples back inside
    for _ in range(60):
        if float(distances_to(x[None, :], center, metric)[0]) <= r:
            return x
        x = center + (x - center) * (1 - 2.0 ** -40)
    return center.copy()


def sample_covering_lemma(params: SparseParams, n_samples: int, rng=None) -> dict:
    """Sample both covering clauses and count violations.

    Clause 1 draws ``alpha <= beta`` and ``x`` in the truncated ball of ``j``
    at ``alpha``; clause 2 draws ``beta >= (1 + eps) * alpha`` and ``x`` in
    the plain ball of radius ``alpha`` around ``j``. In both cases ``x`` must
    lie in the witness's truncated ball at ``beta``. Half of the samples sit
    on ball boundaries.
    """
    rng = np.random.default_rng(rng)
    eps = params.epsilon
    finite = params.removal[np.isfinite(params.removal)]
    top = float(finite.max()) * 1.5 if len(finite) and finite.max() > 0 else 1.0
    counts = {"clause1_ok": 0, "clause1_fail": 0, "clause2_ok": 0, "clause2_fail": 0}
    done1 = 0
    while done1 < n_samples:
        j = int(rng.integers(params.n))
        alpha = float(rng.uniform(0, top))
        r = ball_radius_or_empty(params, j, alpha)
        if r == EMPTY:
            continue
        beta = alpha + float(rng.exponential(top / 4)) if rng.random() < 0.8 else alpha
        x = _sample_in_ball(rng, params.points[j], r, params.metric, rng.random() < 0.5)
        key = "clause1_ok" if witness_contains(params, j, beta, x) is not None else "clause1_fail"
        counts[key] += 1
        done1 += 1
    for _ in range(n_samples):
        j = int(rng.integers(params.n))
        alpha = float(rng.uniform(0, top))
        beta = (1 + eps) * alpha * (1 + float(rng.exponential(0.3)) if rng.random() < 0.8 else 1.0)
        x = _sample_in_ball(rng, params.points[j], alpha, params.metric, rng.random() < 0.5)
        key = "clause2_ok" if witness_contains(params, j, beta, x) is not None else "clause2_fail"
        counts[key] += 1
    return counts


def sample_cone_convexity(params: SparseParams, n_samples: int, rng=None) -> dict:
    """Sample convex combinations of cone points and test them exactly.

    Each sample picks a rank ``i`` and a truncation scale ``alpha``, draws
    two points of the cone (many on its slanted or flat boundary), and
    checks the segment point at a random ``t`` with :func:`cone_contains`
    in rational arithmetic.
    """
    rng = np.random.default_rng(rng)
    finite = params.removal[np.isfinite(params.removal)]
    top = float(finite.max()) * 1.5 if len(finite) and finite.max() > 0 else 1.0
    ok = fail = 0
    while ok + fail < n_samples:
        i = int(rng.integers(params.n))
        alpha = float(rng.uniform(0, top))
        hi = min(alpha, float(params.removal[i]))
        pair = []
        while len(pair) < 2:
            delta = hi if rng.random() < 0.2 else float(rng.uniform(0, hi))
            r = ball_radius_or_empty(params, i, delta)
            x = _sample_in_ball(rng, params.points[i], r, params.metric, rng.random() < 0.6)
            cp = ConePoint(tuple(x), delta)
            if cone_contains(params, i, cp, alpha, exact=True):
                pair.append(cp)
        t = Fraction(float(rng.random()))
        a, b = pair
        x = tuple((1 - t) * Fraction(p) + t * Fraction(q) for p, q in zip(a.x, b.x))
        delta = (1 - t) * Fraction(a.delta) + t * Fraction(b.delta)
        if cone_contains(params, i, ConePoint(x, delta), alpha, exact=True):
            ok += 1
        else:
            fail += 1
    return {"ok": ok, "fail": fail}

