"""Greedy (farthest-point) permutations with insertion radii."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .metric import PointCloud, distances_to, format_float


@dataclass(frozen=True, eq=False)
class GreedyPermutation:
    """A reordering of a cloud.

    Attributes
    ----------
    order : ndarray of int
        ``order[r]`` is the original index of the point of greedy rank ``r``.
    lam : ndarray of float
        Insertion radius of each rank; ``lam[0]`` is ``inf``.
    pred : ndarray of int
        Rank of the nearest earlier point (``-1`` for rank 0).
    """

    order: np.ndarray
    lam: np.ndarray
    pred: np.ndarray

    @property
    def n(self) -> int:
        return len(self.order)

    @property
    def rank(self) -> np.ndarray:
        """Inverse of ``order``: greedy rank of each original index."""
        inv = np.empty(self.n, dtype=np.intp)
        inv[self.order] = np.arange(self.n)
        return inv

    def to_text(self) -> str:
        lines = []
        for r in range(self.n):
            p = "-" if self.pred[r] < 0 else str(int(self.order[self.pred[r]]))
            lines.append(f"{int(self.order[r])} {format_float(self.lam[r])} {p}")
        return "\n".join(lines) + "\n"


def greedy_permutation(cloud: PointCloud, seed: int = 0) -> GreedyPermutation:
    """Farthest-point ordering in O(n^2) time.

    Ties among farthest candidates go to the lowest original index; ties
    among predecessors go to the earliest rank.
    """
    seed = cloud._check(seed)
    n = cloud.n
    pts = cloud.points
    order = np.empty(n, dtype=np.intp)
    lam = np.empty(n)
    pred = np.full(n, -1, dtype=np.intp)

    order[0] = seed
    lam[0] = math.inf
    nearest = distances_to(pts, pts[seed], cloud.metric)
    nearest_rank = np.zeros(n, dtype=np.intp)
    taken = np.zeros(n, dtype=bool)
    taken[seed] = True
    nearest[seed] = -1.0
    for r in range(1, n):
        k = int(np.argmax(nearest))
        order[r] = k
        lam[r] = nearest[k]
        pred[r] = nearest_rank[k]
        taken[k] = True
        d = distances_to(pts, pts[k], cloud.metric)
        d[taken] = -1.0
        closer = d < nearest
        nearest[closer] = d[closer]
        nearest_rank[closer] = r
        nearest[k] = -1.0
    return GreedyPermutation(order, lam, pred)


def verify_net_property(gp: GreedyPermutation, cloud: PointCloud, i: int) -> bool:
    """Check that the first ``i`` points form a ``lam[i-1]``-net of the cloud.

    Packing: the prefix is pairwise at least ``lam[i-1]`` apart.
    Covering: every point is within ``lam[i-1]`` of the prefix.
    """
    if not 1 <= i <= gp.n:
        raise ValueError(f"prefix length {i} outside 1..{gp.n}")
    radius = gp.lam[i - 1]
    prefix = gp.order[:i]
    cover = np.full(cloud.n, math.inf)
    for a, p in enumerate(prefix):
        d = cloud.distances_from(int(p))
        cover = np.minimum(cover, d)
        if a and np.min(d[prefix[:a]]) < radius:
            return False
    return bool(np.all(cover <= radius))


def permutation_from_order(cloud: PointCloud, order: Sequence[int]) -> GreedyPermutation:
    """Insertion radii and predecessors for an arbitrary ordering.

    The result is only a greedy permutation if ``order`` is one; this is used
    to build adversarial inputs for :func:`verify_net_property`.
    """
    order = np.asarray(order, dtype=np.intp)
    n = len(order)
    lam = np.empty(n)
    pred = np.full(n, -1, dtype=np.intp)
    lam[0] = math.inf
    for r in range(1, n):
        d = cloud.distances_from(int(order[r]), order[:r])
        pred[r] = int(np.argmin(d))
        lam[r] = d[pred[r]]
    return GreedyPermutation(order, lam, pred)


def read_permutation(text: str) -> Optional[GreedyPermutation]:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    order = np.array([int(r[0]) for r in rows], dtype=np.intp)
    lam = np.array([float(r[1]) for r in rows])
    rank = {int(o): k for k, o in enumerate(order)}
    pred = np.array([-1 if r[2] == "-" else rank[int(r[2])] for r in rows], dtype=np.intp)
    return GreedyPermutation(order, lam, pred)
