"""Point clouds in a normed space and their distances.

Only the three norms ``l2``, ``l1`` and ``linf`` are supported. Every
distance in the package goes through :func:`distances_to`, so a distance
computed twice (for instance once while building the greedy permutation and
once while checking it) is bit-for-bit identical.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

#: Radius sentinel for the empty ball.
EMPTY = -math.inf


class MetricKind(str, enum.Enum):
    L2 = "l2"
    L1 = "l1"
    LINF = "linf"

    @classmethod
    def parse(cls, value: Union[str, "MetricKind"]) -> "MetricKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"euclidean": "l2", "manhattan": "l1", "cityblock": "l1",
                   "chebyshev": "linf", "max": "linf", "inf": "linf"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown metric {value!r}; expected one of l2, l1, linf") from None


def distances_to(points: np.ndarray, x: np.ndarray, metric: MetricKind) -> np.ndarray:
    """Distances from each row of ``points`` to the single point ``x``.

    Coordinates are accumulated column by column in a fixed order, which
    is fast for the tall, narrow arrays used here and makes the result for
    a given pair independent of which other rows are in the batch.
    """
    points = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    if points.ndim == 1:
        points = points[None, :]
    acc = np.abs(points[:, 0] - x[0])
    if metric is MetricKind.L2:
        acc = acc * acc
        for c in range(1, points.shape[1]):
            t = points[:, c] - x[c]
            acc += t * t
        return np.sqrt(acc)
    if metric is MetricKind.L1:
        for c in range(1, points.shape[1]):
            acc += np.abs(points[:, c] - x[c])
        return acc
    for c in range(1, points.shape[1]):
        np.maximum(acc, np.abs(points[:, c] - x[c]), out=acc)
    return acc


def pairwise_distances(points: np.ndarray, metric: MetricKind) -> np.ndarray:
    """Full distance matrix, row by row through :func:`distances_to`."""
    points = np.asarray(points, dtype=float)
    out = np.empty((len(points), len(points)))
    for i in range(len(points)):
        out[i] = distances_to(points, points[i], metric)
    return out


@dataclass(frozen=True, eq=False)
class PointCloud:
    """A finite point set with a named norm.

    Parameters
    ----------
    points : array-like of shape (n, dim)
    metric : MetricKind or str
    """

    points: np.ndarray
    metric: MetricKind = MetricKind.L2

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"expected a non-empty (n, dim) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "metric", MetricKind.parse(self.metric))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def _check(self, i) -> int:
        if not isinstance(i, (int, np.integer)) or not 0 <= i < self.n:
            raise IndexError(f"point index {i!r} out of range for {self.n} points")
        return int(i)

    def distance(self, i: int, j: int) -> float:
        i, j = self._check(i), self._check(j)
        return float(distances_to(self.points[i:i + 1], self.points[j], self.metric)[0])

    def distances_from(self, i: int, idx=None) -> np.ndarray:
        """Distances from point ``i`` to the points ``idx`` (all points by default)."""
        i = self._check(i)
        pts = self.points if idx is None else self.points[idx]
        return distances_to(pts, self.points[i], self.metric)

    def point_distance(self, i: int, x) -> float:
        i = self._check(i)
        return float(distances_to(np.asarray(x, dtype=float)[None, :], self.points[i], self.metric)[0])

    def diameter(self) -> float:
        return float(pairwise_distances(self.points, self.metric).max())

    def subset(self, idx: Sequence[int]) -> "PointCloud":
        return PointCloud(self.points[list(idx)], self.metric)


def distance(cloud: PointCloud, i: int, j: int) -> float:
    return cloud.distance(i, j)


def ball_contains(cloud: PointCloud, center: int, radius: float, x) -> bool:
    """Closed-ball membership; a radius of :data:`EMPTY` is the empty set."""
    if radius == EMPTY:
        cloud._check(center)
        return False
    return cloud.point_distance(center, x) <= radius


def norm_exact(v: Iterable[Fraction], metric: MetricKind) -> Fraction:
    """Exact norm for l1/linf; the *squared* norm for l2."""
    v = [abs(c) for c in v]
    if metric is MetricKind.L2:
        return sum((c * c for c in v), Fraction(0))
    if metric is MetricKind.L1:
        return sum(v, Fraction(0))
    return max(v)


def contains_exact(center, radius, x, metric: MetricKind) -> bool:
    """Closed-ball membership in exact rational arithmetic.

    ``center`` and ``x`` are sequences of floats or Fractions; floats are
    converted exactly. ``radius`` may be a float, a Fraction, ``inf`` or
    :data:`EMPTY`.
    """
    if radius == EMPTY or radius < 0:
        return False
    if radius == math.inf:
        return True
    r = Fraction(radius)
    v = [Fraction(a) - Fraction(b) for a, b in zip(x, center)]
    if metric is MetricKind.L2:
        return norm_exact(v, metric) <= r * r
    return norm_exact(v, metric) <= r


def read_points(path: Union[str, Path]) -> np.ndarray:
    """Read a whitespace-separated point file; ``#`` starts a comment line."""
    rows = []
    arity = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                row = [float(tok) for tok in line.split()]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if arity is None:
                arity = len(row)
            elif len(row) != arity:
                raise ValueError(f"{path}:{lineno}: expected {arity} coordinates, got {len(row)}")
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no points")
    return np.array(rows, dtype=float)


def format_float(x: float) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return repr(float(x))


def write_points(points: np.ndarray, fh) -> None:
    for row in np.asarray(points, dtype=float):
        fh.write(" ".join(format_float(c) for c in row) + "\n")
