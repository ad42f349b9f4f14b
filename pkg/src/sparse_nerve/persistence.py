"""Persistent homology over GF(2), full filtrations and barcode comparison."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .metric import MetricKind, PointCloud, format_float, pairwise_distances
from .miniball import meb_radius_batch
from .simplices import FilteredComplex, _enforce_monotone, facets

Interval = Tuple[int, float, float]

#: Births below this are treated as 0 when comparing barcodes.
ZERO_BIRTH = 1e-9


@dataclass
class Barcode:
    """Persistence intervals ``(dim, birth, death)`` sorted by (dim, birth, death).

    ``zero_length`` counts pairs with equal birth and death, which are not
    listed. ``pairs`` holds the (creator, destroyer) filtration indices of
    every pair, including zero-length ones.
    """

    intervals: List[Interval]
    zero_length: int = 0
    pairs: List[Tuple[int, int]] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.intervals = sorted((int(d), float(b), float(e)) for d, b, e in self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def in_dim(self, dim: int) -> List[Tuple[float, float]]:
        return [(b, e) for d, b, e in self.intervals if d == dim]

    @property
    def max_dim(self) -> int:
        return max((d for d, _, _ in self.intervals), default=-1)

    def betti_at(self, alpha: float, max_dim: Optional[int] = None) -> List[int]:
        """Number of intervals ``[b, d)`` containing ``alpha``, per dimension."""
        top = self.max_dim if max_dim is None else max_dim
        out = [0] * (top + 1)
        for d, b, e in self.intervals:
            if d <= top and b <= alpha < e:
                out[d] += 1
        return out

    def to_array(self) -> np.ndarray:
        return np.array(self.intervals, dtype=float).reshape(len(self.intervals), 3)

    def to_text(self) -> str:
        return "".join(f"{d} {format_float(b)} {format_float(e)}\n" for d, b, e in self.intervals)

    @classmethod
    def from_text(cls, text: str) -> "Barcode":
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tok = line.split()
            if len(tok) != 3:
                raise ValueError(f"line {lineno}: expected 'dim birth death'")
            rows.append((int(tok[0]), float(tok[1]), float(tok[2])))
        return cls(rows)


def compute_barcode(fc: FilteredComplex) -> Barcode:
    """Standard persistence pairing by left-to-right column reduction over GF(2).

    Columns are stored as Python integers used as bitsets, indexed by the
    position of each face among the simplices of its dimension.
    """
    fc.validate()
    simplices = fc.simplices
    local = {}
    by_dim: Dict[int, List[int]] = {}
    for j, s in enumerate(simplices):
        lst = by_dim.setdefault(s.dim, [])
        local[s.vertices] = len(lst)
        lst.append(j)

    pivot: Dict[Tuple[int, int], int] = {}  # (face dim, low) -> reduced column
    killed = set()
    intervals: List[Interval] = []
    pairs = []
    zero = 0
    for j, s in enumerate(simplices):
        if s.dim == 0:
            continue
        col = 0
        for f in facets(s.vertices):
            col ^= 1 << local[f]
        fd = s.dim - 1
        while col:
            low = col.bit_length() - 1
            other = pivot.get((fd, low))
            if other is None:
                break
            col ^= other
        if col:
            low = col.bit_length() - 1
            pivot[(fd, low)] = col
            creator = by_dim[fd][low]
            killed.add(creator)
            pairs.append((creator, j))
            b = simplices[creator].birth
            if b == s.birth:
                zero += 1
            else:
                intervals.append((fd, b, s.birth))
    paired = killed | {d for _, d in pairs}
    for j, s in enumerate(simplices):
        if j not in paired:
            intervals.append((s.dim, s.birth, math.inf))
    return Barcode(intervals, zero, pairs)


# -- full filtrations ----------------------------------------------------------

def _as_cloud(cloud, metric="l2") -> PointCloud:
    return cloud if isinstance(cloud, PointCloud) else PointCloud(cloud, metric)


def _cliques_under(D: np.ndarray, max_dim: int, radius: float):
    """Vertex arrays of all cliques of the graph ``D <= 2 * radius``, by size."""
    n = len(D)
    adj = D <= 2 * radius
    layers = [np.arange(n, dtype=np.intp)[:, None]]
    for _ in range(max_dim):
        S = layers[-1]
        if len(S) == 0:
            layers.append(np.zeros((0, S.shape[1] + 1), dtype=np.intp))
            continue
        ok = np.all(adj[S], axis=1) & (np.arange(n)[None, :] > S[:, -1:])
        rows, cols = np.nonzero(ok)
        layers.append(np.concatenate([S[rows], cols[:, None]], axis=1))
    return layers


def full_rips_filtration(cloud, max_dim: int = 2, alpha_max: Optional[float] = None,
                         metric="l2") -> FilteredComplex:
    """Every simplex of diameter at most ``2 * alpha_max``, born at half its diameter.

    ``alpha_max`` defaults to the diameter of the cloud.
    """
    cloud = _as_cloud(cloud, metric)
    D = pairwise_distances(cloud.points, cloud.metric)
    alpha_max = float(D.max()) if alpha_max is None else float(alpha_max)
    births: Dict[Tuple[int, ...], float] = {}
    for S in _cliques_under(D, max_dim, alpha_max):
        if S.shape[1] == 1:
            b = np.zeros(len(S))
        else:
            b = np.max(np.stack([D[S[:, a], S[:, c]] for a, c in
                                 itertools.combinations(range(S.shape[1]), 2)]), axis=0) / 2
        births.update(zip(map(tuple, S.tolist()), b.tolist()))
    return FilteredComplex.from_births(births, max_dim)


def full_cech_filtration_l2(cloud, max_dim: int = 2, alpha_max: Optional[float] = None) -> FilteredComplex:
    """Every simplex whose smallest enclosing ball has radius at most ``alpha_max``.

    Pairs are born at half their distance; larger simplices at their
    enclosing radius. ``alpha_max`` defaults to the diameter of the cloud.
    """
    cloud = _as_cloud(cloud)
    if cloud.metric is not MetricKind.L2:
        raise ValueError("full_cech_filtration_l2 needs an l2 cloud")
    D = pairwise_distances(cloud.points, cloud.metric)
    alpha_max = float(D.max()) if alpha_max is None else float(alpha_max)
    births: Dict[Tuple[int, ...], float] = {}
    for S in _cliques_under(D, max_dim, alpha_max):
        k = S.shape[1]
        if k == 1:
            b = np.zeros(len(S))
        elif k == 2:
            b = D[S[:, 0], S[:, 1]] / 2
        else:
            b = meb_radius_batch(cloud.points[S])
        keep = b <= alpha_max
        births.update(zip(map(tuple, S[keep].tolist()), b[keep].tolist()))
    births = {s: t for s, t in births.items() if all(f in births for f in facets(s))}
    _enforce_monotone(births)
    return FilteredComplex.from_births(births, max_dim)


# -- Betti numbers by rank -------------------------------------------------

def gf2_rank(M: np.ndarray) -> int:
    """Rank over GF(2) of a 0/1 matrix by Gaussian elimination."""
    M = np.array(M, dtype=bool)
    if M.shape[0] > M.shape[1]:
        M = M.T.copy()
    rank = 0
    rows = M.shape[0]
    for c in range(M.shape[1]):
        if rank == rows:
            break
        hits = np.flatnonzero(M[rank:, c]) + rank
        if len(hits) == 0:
            continue
        p = hits[0]
        if p != rank:
            M[[rank, p]] = M[[p, rank]]
        below = np.flatnonzero(M[rank + 1:, c]) + rank + 1
        M[below] ^= M[rank]
        rank += 1
    return rank


def boundary_matrix(simplices: Iterable[Tuple[int, ...]], dim: int) -> np.ndarray:
    """Dense boundary map from ``dim``-simplices to ``(dim-1)``-simplices."""
    simplices = [tuple(sorted(s)) for s in simplices]
    rows = sorted(s for s in simplices if len(s) == dim)
    cols = sorted(s for s in simplices if len(s) == dim + 1)
    index = {s: i for i, s in enumerate(rows)}
    M = np.zeros((len(rows), len(cols)), dtype=bool)
    for j, s in enumerate(cols):
        for f in facets(s):
            M[index[f], j] = True
    return M


def betti_numbers(simplices: Iterable[Tuple[int, ...]], max_dim: Optional[int] = None) -> List[int]:
    """GF(2) Betti numbers of a simplicial complex given by its simplices."""
    simplices = [tuple(sorted(s)) for s in simplices]
    top = max((len(s) - 1 for s in simplices), default=-1) if max_dim is None else max_dim
    counts = [sum(1 for s in simplices if len(s) == k + 1) for k in range(top + 2)]
    ranks = [0] + [gf2_rank(boundary_matrix(simplices, k)) if counts[k] and counts[k - 1] else 0
                   for k in range(1, top + 2)]
    return [counts[k] - ranks[k] - ranks[k + 1] for k in range(top + 1)]


# -- barcode comparison ------------------------------------------------------

def _ratio(x: float, y: float) -> float:
    if x == math.inf and y == math.inf:
        return 1.0
    if x == math.inf or y == math.inf:
        return math.inf
    lo, hi = min(x, y), max(x, y)
    if hi < ZERO_BIRTH:
        return 1.0
    if lo <= 0:
        return math.inf
    return hi / lo


def pair_ratio(a: Tuple[float, float], b: Tuple[float, float]) -> float:
    """Smallest ``c`` for which the bars ``a`` and ``b`` may be matched."""
    rb = 1.0 if a[0] < ZERO_BIRTH and b[0] < ZERO_BIRTH else _ratio(a[0], b[0])
    return max(rb, _ratio(a[1], b[1]))


def bar_ratio(bar: Tuple[float, float]) -> float:
    """``death / birth``; a bar longer than ``c`` in this sense must be matched."""
    b, d = bar
    if d == math.inf:
        return math.inf
    if b <= 0:
        return math.inf if d > 0 else 1.0
    return d / b


@dataclass
class MatchResult:
    """Outcome of :func:`barcode_approx_check`.

    ``matched`` pairs an interval of the first barcode with one of the
    second; ``unmatched_ok`` lists the remaining intervals, all short.
    ``worst_ratio`` is the smallest ``c`` that would pass (``None`` unless
    requested).
    """

    ok: bool
    c: float
    matched: List[Tuple[Interval, Interval]] = field(default_factory=list)
    unmatched_ok: List[Interval] = field(default_factory=list)
    failed_dims: List[int] = field(default_factory=list)
    worst_ratio: Optional[float] = None

    def report(self) -> str:
        lines = [f"{'ok' if self.ok else 'FAILED'} at c = {self.c!r}"]
        if self.failed_dims:
            lines.append(f"no admissible matching in dims {self.failed_dims}")
        lines.append(f"matched {len(self.matched)} pairs, {len(self.unmatched_ok)} short bars unmatched")
        if self.worst_ratio is not None:
            lines.append(f"worst_ratio = {self.worst_ratio!r}")
        return "\n".join(lines)


def _ratio_matrix(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized :func:`_ratio` over all pairs of ``x`` and ``y``."""
    X, Y = np.meshgrid(x, y, indexing="ij")
    lo, hi = np.minimum(X, Y), np.maximum(X, Y)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(lo > 0, hi / lo, np.inf)
    out[hi < ZERO_BIRTH] = 1.0
    out[np.isinf(X) != np.isinf(Y)] = np.inf
    out[np.isinf(X) & np.isinf(Y)] = 1.0
    return out


def _pair_ratios(L, R) -> np.ndarray:
    """Matrix of :func:`pair_ratio` values between bars ``L`` and ``R``."""
    L = np.array(L, dtype=float).reshape(len(L), 2)
    R = np.array(R, dtype=float).reshape(len(R), 2)
    rb = _ratio_matrix(L[:, 0], R[:, 0])
    rb[(L[:, 0] < ZERO_BIRTH)[:, None] & (R[:, 0] < ZERO_BIRTH)[None, :]] = 1.0
    return np.maximum(rb, _ratio_matrix(L[:, 1], R[:, 1]))


def _match_dim(ratios: np.ndarray, long_l: np.ndarray, long_r: np.ndarray, c: float):
    """Matching covering every bar longer than ``c``, or None.

    ``ratios`` holds the pair ratios and ``long_l``, ``long_r`` the bar
    ratios of each side. Solved as an assignment problem in which each bar
    may also go to its own dummy partner; only short bars may, and doing so
    costs 1, so the matching found is as large as possible.
    """
    nl, nr = ratios.shape
    if nl + nr == 0:
        return []
    big = float(nl + nr + 1)
    C = np.full((nl + nr, nr + nl), big)
    C[:nl, :nr] = np.where(ratios <= c, 0.0, big)
    C[np.arange(nl), nr + np.arange(nl)] = np.where(long_l <= c, 1.0, big)
    C[nl + np.arange(nr), np.arange(nr)] = np.where(long_r <= c, 1.0, big)
    C[nl:, nr:] = 0.0
    rows, cols = linear_sum_assignment(C)
    if C[rows, cols].sum() >= big:
        return None
    return [(int(i), int(j)) for i, j in zip(rows, cols) if i < nl and j < nr]


def _worst_dim(ratios, long_l, long_r) -> float:
    cand = np.unique(np.concatenate([ratios.ravel(), long_l, long_r, [1.0, np.inf]]))
    cand = cand[cand >= 1.0]
    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _match_dim(ratios, long_l, long_r, cand[mid]) is not None:
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])


def barcode_approx_check(B1: Barcode, B2: Barcode, c: float, find_worst: bool = False,
                         dims: Optional[Sequence[int]] = None) -> MatchResult:
    """Decide whether ``B1`` is a multiplicative ``c``-approximation of ``B2``.

    Per dimension, a partial matching must pair every bar with
    ``death / birth > c`` on either side, and matched bars must agree in
    birth and death up to a factor ``c``. Births below ``ZERO_BIRTH`` are
    treated as equal. ``dims`` restricts the dimensions compared.
    """
    if not c >= 1:
        raise ValueError("c must be at least 1")
    if dims is None:
        dims = range(max(B1.max_dim, B2.max_dim) + 1)
    res = MatchResult(ok=True, c=float(c))
    worst = 1.0
    for dim in dims:
        L, R = B1.in_dim(dim), B2.in_dim(dim)
        ratios = _pair_ratios(L, R)
        long_l = np.array([bar_ratio(a) for a in L], dtype=float)
        long_r = np.array([bar_ratio(b) for b in R], dtype=float)
        m = _match_dim(ratios, long_l, long_r, c)
        if m is None:
            res.ok = False
            res.failed_dims.append(dim)
        else:
            used_l = {i for i, _ in m}
            used_r = {j for _, j in m}
            res.matched.extend(((dim,) + L[i], (dim,) + R[j]) for i, j in m)
            res.unmatched_ok.extend((dim,) + a for i, a in enumerate(L) if i not in used_l)
            res.unmatched_ok.extend((dim,) + b for j, b in enumerate(R) if j not in used_r)
        if find_worst:
            worst = max(worst, _worst_dim(ratios, long_l, long_r))
    if find_worst:
        res.worst_ratio = worst
    return res
