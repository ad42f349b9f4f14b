"""Incremental neighbor structure and the edges of the sparse filtration.

Points are inserted in greedy order. Each inserted point keeps a parent,
a children list and a neighbor list; lists are pruned lazily whenever they
are walked, so only entries still required by the structure's invariants
survive. After inserting rank ``i`` its neighbor list holds every earlier
point within ``kappa * 2**level[i]``, which contains every possible
neighbor in the filtration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .balls import SparseParams
from .metric import distances_to, format_float

STRICT = "strict"
PAPER = "paper"

# Relative slack on the neighbor radius; extra neighbors never hurt.
_RADIUS_SLACK = 1e-9


def kappa(epsilon: float) -> float:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return (epsilon * epsilon + 3 * epsilon + 2) / epsilon


def level_of(lam: float) -> float:
    """``ceil(log2(lam))`` computed exactly; ``inf`` for ``inf``, ``-inf`` for 0."""
    if lam == math.inf:
        return math.inf
    if lam <= 0:
        return -math.inf
    m, e = math.frexp(lam)
    return float(e - 1 if m == 0.5 else e)


def scale_of(level: float) -> float:
    """``2**level`` with the sentinels mapped to ``inf`` and 0."""
    if level == math.inf:
        return math.inf
    if level == -math.inf:
        return 0.0
    return math.ldexp(1.0, int(level))


def _pow2(levels: np.ndarray) -> np.ndarray:
    """Vectorized :func:`scale_of`."""
    levels = np.asarray(levels, dtype=float)
    finite = np.isfinite(levels)
    out = np.where(levels > 0, np.inf, 0.0)
    out[finite] = np.ldexp(1.0, levels[finite].astype(int))
    return out


def _check_mode(mode: str) -> str:
    if mode not in (STRICT, PAPER):
        raise ValueError(f"mode must be {STRICT!r} or {PAPER!r}, got {mode!r}")
    return mode


def edge_birth_time(params: SparseParams, i: int, j: int, mode: str = STRICT) -> float:
    """Scale at which the truncated balls of ranks ``i`` and ``j`` first meet.

    The endpoint with the smaller insertion radius plays the role of ``i``.
    In ``"paper"`` mode the two-branch formula is returned as is; in
    ``"strict"`` mode a birth later than the removal time of the smaller
    ball is reported as ``inf`` since the two balls never coexist then.
    """
    _check_mode(mode)
    if i == j:
        raise ValueError("an edge needs two distinct endpoints")
    lam = params.lam
    if lam[i] > lam[j]:
        i, j = j, i
    d = params.dist(i, j)
    eps = params.epsilon
    if d <= 2 * lam[i] * (1 + eps) / eps:
        birth = d / 2
    elif d <= (lam[i] + lam[j]) * (1 + eps) / eps:
        birth = d - lam[i] * (1 + eps) / eps
    else:
        return math.inf
    if mode == STRICT and birth > params.removal[i]:
        return math.inf
    return float(birth)


def edge_birth_times(params: SparseParams, i: int, js, d=None, mode: str = STRICT) -> np.ndarray:
    """Vectorized :func:`edge_birth_time` from rank ``i`` to each rank in ``js``.

    ``d`` may carry precomputed distances. The arithmetic mirrors the scalar
    version operation for operation, so results agree bit for bit.
    """
    _check_mode(mode)
    js = np.asarray(js, dtype=np.intp)
    if d is None:
        d = params.dists_from(i, js)
    return pair_birth_times(params.lam[i], params.lam[js], d, params.epsilon, mode)


def pair_birth_times(lam_a, lam_b, d, eps: float, mode: str = STRICT) -> np.ndarray:
    """Edge birth formula on broadcast arrays of insertion radii and distances."""
    lam_a, lam_b, d = np.broadcast_arrays(np.asarray(lam_a, dtype=float),
                                          np.asarray(lam_b, dtype=float),
                                          np.asarray(d, dtype=float))
    small = np.minimum(lam_a, lam_b)
    large = np.maximum(lam_a, lam_b)
    with np.errstate(invalid="ignore"):
        first = d <= 2 * small * (1 + eps) / eps
        second = ~first & (d <= (small + large) * (1 + eps) / eps)
        birth = np.full(d.shape, np.inf)
        birth[first] = d[first] / 2
        birth[second] = d[second] - small[second] * (1 + eps) / eps
    if mode == STRICT:
        birth[birth > small * (1 + eps) ** 2 / eps] = np.inf
    return birth


@dataclass
class SparseGraph:
    """Directed edges ``src -> dst`` between greedy ranks, ``src`` inserted later.

    ``out[src]`` maps each out-neighbor to the edge's birth time.
    """

    n: int
    out: List[Dict[int, float]] = field(default_factory=list)

    def __post_init__(self):
        if not self.out:
            self.out = [dict() for _ in range(self.n)]

    def add(self, src: int, dst: int, birth: float) -> None:
        self.out[src][dst] = birth

    def edges(self) -> List[Tuple[int, int, float]]:
        return [(s, d, b) for s, nb in enumerate(self.out) for d, b in nb.items()]

    def births(self) -> Dict[Tuple[int, int], float]:
        """Undirected view keyed by sorted rank pairs."""
        return {(min(s, d), max(s, d)): b for s, d, b in self.edges()}

    def adjacency(self) -> List[set]:
        adj = [set() for _ in range(self.n)]
        for s, d, _ in self.edges():
            adj[s].add(d)
            adj[d].add(s)
        return adj

    def out_degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.out], dtype=int)

    def __len__(self):
        return sum(len(nb) for nb in self.out)

    def to_text(self, order=None) -> str:
        """Lines ``i j birth`` sorted by ``(birth, i, j)``; original indices if ``order`` is given."""
        label = (lambda r: int(order[r])) if order is not None else int
        rows = sorted((b, label(s), label(d)) for s, d, b in self.edges())
        return "".join(f"{s} {d} {format_float(b)}\n" for b, s, d in rows)


class NeighborStructure:
    """Parents, children and neighbor lists over a growing greedy prefix.

    Lists are plain Python lists of ranks. ``cur`` is the level of the most
    recently inserted point; the lazy pruning rules use it.
    """

    def __init__(self, params: SparseParams):
        self.params = params
        self.n = params.n
        self.kappa = kappa(params.epsilon)
        self.level = [level_of(float(l)) for l in params.lam]
        self.scale = [scale_of(l) for l in self.level]
        self.pred = [int(p) for p in params.gp.pred]
        self.parent = [-1] * self.n
        self.nbr: List[List[int]] = [[] for _ in range(self.n)]
        self.ch: List[List[int]] = [[] for _ in range(self.n)]
        self.by_level: Dict[float, List[int]] = {}
        self.inserted = 0
        self.cur = math.inf
        self._level_arr = np.array(self.level)

    def _dists(self, i: int, idx) -> np.ndarray:
        pts = self.params.points
        return distances_to(pts[idx], pts[i], self.params.metric)

    def walk_nbr(self, q: int) -> List[int]:
        """Enumerate ``nbr(q)``, dropping entries the invariant no longer needs."""
        lst = self.nbr[q]
        if len(lst) <= 1:
            return lst
        idx = np.array(lst)
        d = self._dists(q, idx)
        top = min(self.level[q], self.cur + 1)
        lev = np.minimum(self._level_arr[idx], top)
        thr = self.kappa * _pow2(lev) * (1 + _RADIUS_SLACK)
        keep = d <= thr
        if not keep.all():
            lst = idx[keep].tolist()
            self.nbr[q] = lst
        return lst

    def walk_ch(self, q: int) -> List[int]:
        """Enumerate ``ch(q)``, keeping ``q`` and its children at the current level."""
        parent, level, cur = self.parent, self.level, self.cur
        lst = self.ch[q]
        kept = [k for k in lst if k == q or (parent[k] == q and level[k] == cur)]
        if len(kept) != len(lst):
            self.ch[q] = kept
        return kept

    def _register(self, i: int) -> None:
        self.by_level.setdefault(self.level[i], []).append(i)
        self.inserted += 1

    def insert(self, i: int) -> None:
        if i != self.inserted:
            raise ValueError(f"points must be inserted in greedy order: expected rank {self.inserted}, got {i}")
        level = self.level
        if i == 0:
            self.parent[0] = 0
            self.ch[0].append(0)
            self.nbr[0].append(0)
            self.cur = level[0]
            self._register(0)
            return

        li = level[i]
        if li < level[i - 1]:
            for k in self.by_level.get(level[i - 1], ()):
                self.parent[k] = k
        self.cur = li

        # parent: nearest higher-level point among nbr(parent(pred))
        start = self.parent[self.pred[i]]
        cand = self.walk_nbr(start)
        best = start
        idx = np.array(cand)
        d = self._dists(i, idx)
        higher = self._level_arr[idx] > li
        if higher.any():
            bound = min(float(d[higher].min()), float(self._dists(i, [start])[0]))
            hits = np.flatnonzero(higher & (d <= bound))
            if len(hits):
                best = int(idx[hits[-1]])
        self.parent[i] = best

        self.ch[i].append(i)
        self.ch[best].append(i)
        self.nbr[i].append(i)

        radius = self.kappa * self.scale[i] * (1 + _RADIUS_SLACK)
        # walk ch(q) for q in nbr(parent(p_i)); same pruning as walk_ch, inlined
        parent, ch, cur = self.parent, self.ch, li
        gathered = []
        for q in self.walk_nbr(best):
            lst = ch[q]
            if len(lst) == 1:
                gathered.append(q)
                continue
            kept = [k for k in lst if k == q or (parent[k] == q and level[k] == cur)]
            if len(kept) != len(lst):
                ch[q] = kept
            gathered.extend(kept)
        cand = np.unique(np.array(gathered, dtype=np.intp))
        cand = cand[cand != i]
        if len(cand):
            d = self._dists(i, cand)
            for k in cand[d <= radius].tolist():
                self.nbr[i].append(k)
                self.nbr[k].append(i)
        self._register(i)


def construct_edges(params: SparseParams, mode: str = STRICT,
                    on_insert: Optional[Callable[[NeighborStructure, int], None]] = None,
                    structure: Optional[NeighborStructure] = None) -> SparseGraph:
    """All edges of the sparse filtration with their birth times.

    Each point is inserted into a :class:`NeighborStructure`; its neighbor
    list is then checked with :func:`edge_birth_time`. ``on_insert`` is
    called after every insertion (used by tests to audit invariants).
    """
    _check_mode(mode)
    D = structure if structure is not None else NeighborStructure(params)
    G = SparseGraph(params.n)
    for i in range(params.n):
        D.insert(i)
        if on_insert is not None:
            on_insert(D, i)
        js = np.array([j for j in D.nbr[i] if j != i], dtype=np.intp)
        if len(js):
            births = edge_birth_times(params, i, js, mode=mode)
            ok = births < np.inf
            G.out[i] = dict(zip(js[ok].tolist(), births[ok].tolist()))
    return G


def brute_force_edges(params: SparseParams, mode: str = STRICT) -> Dict[Tuple[int, int], float]:
    """Every pair with a finite birth, by checking all pairs."""
    out = {}
    for j in range(params.n):
        for i in range(j + 1, params.n):
            b = edge_birth_time(params, i, j, mode)
            if b < math.inf:
                out[(j, i)] = b
    return out


def check_invariants_bruteforce(D: NeighborStructure, m: Optional[int] = None) -> bool:
    """Verify the parent, child and neighbor invariants over the first ``m`` ranks.

    ``m`` defaults to the number of inserted points. Every pair of inserted
    points is examined, so this is quadratic.
    """
    m = D.inserted if m is None else m
    if m == 0:
        return True
    level = np.array(D.level[:m])
    cur = level[m - 1]
    pts = D.params.points[:m]
    dist = np.empty((m, m))
    for a in range(m):
        dist[a] = distances_to(pts, pts[a], D.params.metric)

    for j in range(m):
        p = D.parent[j]
        if m == 1 or level[j] > cur:
            if p != j:
                return False
            continue
        if not 0 <= p < m or not level[p] > cur or not dist[j, p] <= scale_of(cur):
            return False

    for j in range(m):
        if j not in D.ch[j]:
            return False
    for k in range(m):
        p = D.parent[k]
        if p != k and level[k] == cur and k not in D.ch[p]:
            return False

    thr = D.kappa * _pow2(np.minimum(np.minimum.outer(level, level), cur + 1))
    required = dist <= thr
    have = np.zeros((m, m), dtype=bool)
    for j in range(m):
        lst = [k for k in D.nbr[j] if k < m]
        have[j, lst] = True
    return bool(np.all(have | ~required))
