"""Higher simplices of the sparse filtration and the filtered complex itself."""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .balls import SparseParams
from .metric import MetricKind, format_float
from .miniball import BallStack, meb_radius_batch
from .neighbors import STRICT, SparseGraph, construct_edges, pair_birth_times

BirthFn = Callable[[Tuple[int, ...]], float]
BatchBirthFn = Callable[[np.ndarray], np.ndarray]

#: Relative bisection tolerance on the scale for Euclidean Čech births.
CECH_REL_TOL = 1e-9
#: Feasibility slack when testing that a set of balls meets.
CECH_FEAS_SLACK = 1e-10
#: Births this far below a facet (relative) are raised to the facet's birth.
MONOTONE_TOL = 1e-9


class Flavor(str, enum.Enum):
    RIPS = "rips"
    CECH = "cech"

    @classmethod
    def parse(cls, value) -> "Flavor":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown flavor {value!r}; expected rips or cech") from None


class FilteredSimplex(NamedTuple):
    vertices: Tuple[int, ...]
    birth: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def _sort_key(s: FilteredSimplex):
    return (s.birth, len(s.vertices), s.vertices)


def facets(vertices: Tuple[int, ...]) -> List[Tuple[int, ...]]:
    if len(vertices) < 2:
        return []
    return [vertices[:k] + vertices[k + 1:] for k in range(len(vertices))]


@dataclass
class FilteredComplex:
    """Simplices with birth times, sorted by ``(birth, dim, vertices)``.

    Vertex tuples are strictly increasing. The list is closed under facets
    and every facet precedes its cofaces.
    """

    simplices: List[FilteredSimplex]
    max_dim: int = -1
    _index: Optional[Dict[Tuple[int, ...], int]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.max_dim < 0 and self.simplices:
            self.max_dim = max(s.dim for s in self.simplices)

    @classmethod
    def from_births(cls, births: Dict[Tuple[int, ...], float], max_dim: int = -1) -> "FilteredComplex":
        simplices = [FilteredSimplex(tuple(v), float(b)) for v, b in births.items()]
        simplices.sort(key=_sort_key)
        return cls(simplices, max_dim)

    def __len__(self):
        return len(self.simplices)

    def __iter__(self):
        return iter(self.simplices)

    @property
    def index(self) -> Dict[Tuple[int, ...], int]:
        if self._index is None or len(self._index) != len(self.simplices):
            self._index = {s.vertices: k for k, s in enumerate(self.simplices)}
        return self._index

    def births(self) -> Dict[Tuple[int, ...], float]:
        return {s.vertices: s.birth for s in self.simplices}

    def counts(self) -> List[int]:
        """Number of simplices per dimension."""
        out = [0] * (self.max_dim + 1)
        for s in self.simplices:
            out[s.dim] += 1
        return out

    def at(self, alpha: float) -> List[Tuple[int, ...]]:
        """Vertex sets of the complex at scale ``alpha`` (births <= alpha)."""
        return [s.vertices for s in self.simplices if s.birth <= alpha]

    def validate(self) -> None:
        """Raise ValueError unless the list is sorted, closed and monotone."""
        index = self.index
        if len(index) != len(self.simplices):
            raise ValueError("duplicate simplices")
        prev = None
        for k, s in enumerate(self.simplices):
            if any(a >= b for a, b in zip(s.vertices, s.vertices[1:])):
                raise ValueError(f"vertices of {s.vertices} are not strictly increasing")
            if not math.isfinite(s.birth) or s.birth < 0:
                raise ValueError(f"simplex {s.vertices} has birth {s.birth}")
            key = _sort_key(s)
            if prev is not None and key < prev:
                raise ValueError(f"simplex {s.vertices} is out of order")
            prev = key
            for f in facets(s.vertices):
                j = index.get(f)
                if j is None:
                    raise ValueError(f"facet {f} of {s.vertices} is missing")
                if j > k:
                    raise ValueError(f"facet {f} comes after {s.vertices}")

    def to_text(self) -> str:
        return "".join(f"{format_float(s.birth)} {s.dim} {' '.join(map(str, s.vertices))}\n"
                       for s in self.simplices)

    @classmethod
    def from_text(cls, text: str) -> "FilteredComplex":
        simplices = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tok = line.split()
            try:
                birth, dim = float(tok[0]), int(tok[1])
                verts = tuple(int(t) for t in tok[2:])
            except (ValueError, IndexError):
                raise ValueError(f"line {lineno}: expected 'birth dim v0 ... vk'") from None
            if len(verts) != dim + 1:
                raise ValueError(f"line {lineno}: dimension {dim} needs {dim + 1} vertices")
            simplices.append(FilteredSimplex(verts, birth))
        fc = cls(simplices)
        fc.validate()
        return fc

    def relabel(self, labels: Sequence[int]) -> "FilteredComplex":
        """Rename vertex ``v`` to ``labels[v]`` and re-sort."""
        births = {tuple(sorted(int(labels[v]) for v in s.vertices)): s.birth for s in self.simplices}
        return FilteredComplex.from_births(births, self.max_dim)


# -- birth functions ---------------------------------------------------------

def simplex_birth_time_rips(params: SparseParams, sigma: Sequence[int],
                            edge_births: Dict[Tuple[int, int], float]) -> float:
    """Latest edge birth, provided every ball in ``sigma`` still exists then."""
    if len(sigma) == 1:
        return 0.0
    t = 0.0
    for a, b in itertools.combinations(sorted(sigma), 2):
        e = edge_births.get((a, b), math.inf)
        if e == math.inf:
            return math.inf
        t = max(t, e)
    if t > min(params.removal[v] for v in sigma):
        return math.inf
    return t


def cech_linf_births(params: SparseParams, sigmas, mode: str = STRICT) -> np.ndarray:
    """Max-norm Čech births of many simplices of equal size at once.

    Max-norm balls are boxes, and boxes meet iff their coordinate intervals
    meet pairwise; each coordinate reduces to a 1-D two-ball problem solved
    by the edge birth formula.
    """
    sigmas = np.atleast_2d(np.asarray(sigmas, dtype=np.intp))
    out = np.zeros(len(sigmas))
    if sigmas.shape[1] < 2 or len(sigmas) == 0:
        return out
    P, lam = params.points, params.lam
    for a, b in itertools.combinations(range(sigmas.shape[1]), 2):
        A, B = sigmas[:, a], sigmas[:, b]
        gaps = np.abs(P[A] - P[B])
        t = pair_birth_times(lam[A][:, None], lam[B][:, None], gaps, params.epsilon, mode)
        np.maximum(out, t.max(axis=1), out=out)
    out[out > params.removal[sigmas].min(axis=1)] = np.inf
    return out


def simplex_birth_time_cech_linf(params: SparseParams, sigma: Sequence[int],
                                 mode: str = STRICT) -> float:
    """First scale at which the truncated max-norm balls of ``sigma`` share a point."""
    sigma = list(sigma)
    if len(sigma) == 1:
        return 0.0
    return float(cech_linf_births(params, np.array([sigma]), mode)[0])


def cech_l2_births(params: SparseParams, sigmas) -> np.ndarray:
    """Euclidean Čech births of many simplices of equal size at once.

    ``sigmas`` is an int array of shape (n, k) of greedy ranks. A simplex
    whose smallest enclosing ball fits under every radius cap is born at
    that ball's radius. The others are found by a grid search on
    ``[meb radius, min removal time]`` refined to relative width
    ``CECH_REL_TOL``; radii only grow with the scale, so the balls meet on
    an interval ending at the removal time.
    """
    if params.metric is not MetricKind.L2:
        raise ValueError("Euclidean Čech births need an l2 cloud")
    sigmas = np.atleast_2d(np.asarray(sigmas, dtype=np.intp))
    out = np.zeros(len(sigmas))
    if sigmas.shape[1] < 2 or len(sigmas) == 0:
        return out
    for s in range(0, len(sigmas), _CECH_BLOCK):
        out[s:s + _CECH_BLOCK] = _cech_l2_block(params, sigmas[s:s + _CECH_BLOCK])
    return out


_CECH_BLOCK = 1024
_GRID = 32


def _cech_l2_block(params: SparseParams, sigmas: np.ndarray) -> np.ndarray:
    P = params.points[sigmas]
    caps = params.caps[sigmas]
    top = params.removal[sigmas].min(axis=1)
    rho = meb_radius_batch(P)
    out = np.full(len(sigmas), np.inf)
    easy = (rho <= caps.min(axis=1)) & (rho <= top)
    out[easy] = rho[easy]
    hard = np.flatnonzero(~easy & (rho <= top))
    if len(hard) == 0:
        return out
    balls = BallStack(P[hard])
    caps = caps[hard]

    def meet(rows, alpha):
        # alpha has shape (len(rows), m)
        R = np.minimum(alpha[:, :, None], caps[rows][:, None, :])
        return balls.meet(R, CECH_FEAS_SLACK * np.maximum(1.0, alpha), rows)

    hi = top[hard].copy()
    alive = meet(np.arange(len(hard)), hi[:, None])[:, 0]
    lo = rho[hard].copy()
    res = np.full(len(hard), np.inf)
    active = np.flatnonzero(alive)
    t = np.arange(_GRID + 1) / _GRID
    for _ in range(60):
        done = hi[active] - lo[active] <= CECH_REL_TOL * hi[active]
        res[active[done]] = hi[active[done]]
        active = active[~done]
        if len(active) == 0:
            break
        a, b = lo[active], hi[active]
        grid = a[:, None] + (b - a)[:, None] * t[None, :]
        grid[:, -1] = b
        ok = meet(active, grid)
        first = np.argmax(ok, axis=1)
        at_lo = first == 0
        res[active[at_lo]] = a[at_lo]
        hi[active] = grid[np.arange(len(active)), first]
        lo[active] = np.where(at_lo, a, grid[np.arange(len(active)), np.maximum(first - 1, 0)])
        active = active[~at_lo]
    else:
        bad = active[0]
        raise RuntimeError(f"Čech birth search for simplex {sigmas[hard[bad]].tolist()} did not "
                           f"converge: lo={lo[bad]!r}, hi={hi[bad]!r}")
    out[hard] = res
    return out


def simplex_birth_time_cech_l2(params: SparseParams, sigma: Sequence[int]) -> float:
    """First scale at which the truncated Euclidean balls of ``sigma`` share a point."""
    sigma = list(sigma)
    if len(sigma) == 1:
        return 0.0
    return float(cech_l2_births(params, np.array([sigma]))[0])


def birth_function(params: SparseParams, flavor, graph: SparseGraph, mode: str = STRICT) -> BirthFn:
    """The birth function matching ``flavor`` and the cloud's metric."""
    flavor = Flavor.parse(flavor)
    if flavor is Flavor.RIPS:
        births = graph.births()
        return lambda sigma: simplex_birth_time_rips(params, sigma, births)
    if params.metric is MetricKind.L2:
        return lambda sigma: simplex_birth_time_cech_l2(params, sigma)
    if params.metric is MetricKind.LINF:
        return lambda sigma: simplex_birth_time_cech_linf(params, sigma, mode)
    raise ValueError("the Čech flavor is only available for l2 and linf clouds; use rips for l1")


def batch_birth_function(params: SparseParams, flavor, graph: SparseGraph,
                         mode: str = STRICT) -> BatchBirthFn:
    """Like :func:`birth_function` but mapping an (n, k) rank array to n births."""
    flavor = Flavor.parse(flavor)
    if flavor is Flavor.CECH and params.metric is MetricKind.L2:
        return lambda sigmas: cech_l2_births(params, sigmas)
    if flavor is Flavor.CECH and params.metric is MetricKind.LINF:
        return lambda sigmas: cech_linf_births(params, sigmas, mode)
    fn = birth_function(params, flavor, graph, mode)
    return lambda sigmas: np.array([fn(tuple(row)) for row in np.asarray(sigmas).tolist()], dtype=float)


# -- enumeration -------------------------------------------------------------

def enumerate_cliques(G: SparseGraph, k: int, adjacency: Optional[List[set]] = None) -> np.ndarray:
    """Sorted vertex tuples of all ``(k+1)``-cliques, as an int array of shape (m, k+1).

    Each clique is reported once, from its latest vertex ``v``: the other
    ``k`` vertices are drawn from ``v``'s out-neighbors. Cliques are grown
    one vertex at a time so non-cliques are abandoned early.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    adj = adjacency if adjacency is not None else G.adjacency()
    found: List[Tuple[int, ...]] = []

    def grow(v, chosen, candidates):
        if len(chosen) == k:
            found.append(tuple(sorted(chosen + [v])))
            return
        need = k - len(chosen)
        for pos, u in enumerate(candidates):
            if len(candidates) - pos < need:
                break
            grow(v, chosen + [u], [w for w in candidates[pos + 1:] if w in adj[u]])

    for v in range(G.n):
        out = sorted(G.out[v])
        if len(out) >= k:
            grow(v, [], out)
    return np.array(found, dtype=np.intp).reshape(len(found), k + 1)


def find_simplices(G: SparseGraph, k: int, birth_fn: Optional[BirthFn] = None,
                   adjacency: Optional[List[set]] = None,
                   batch_fn: Optional[BatchBirthFn] = None) -> Dict[Tuple[int, ...], float]:
    """All ``k``-simplices with finite birth.

    Candidates come from :func:`enumerate_cliques`. Births are computed by
    ``batch_fn`` on the whole candidate array when given, else by
    ``birth_fn`` one simplex at a time.
    """
    if birth_fn is None and batch_fn is None:
        raise ValueError("need birth_fn or batch_fn")
    cand = enumerate_cliques(G, k, adjacency)
    if batch_fn is not None:
        births = np.asarray(batch_fn(cand), dtype=float) if len(cand) else np.zeros(0)
    else:
        births = np.array([birth_fn(tuple(c)) for c in cand.tolist()], dtype=float)
    keep = births < np.inf
    return dict(zip(map(tuple, cand[keep].tolist()), births[keep].tolist()))


def brute_force_simplices(n: int, k: int, birth_fn: Optional[BirthFn],
                          edge_births: Dict[Tuple[int, int], float],
                          batch_fn: Optional[BatchBirthFn] = None) -> Dict[Tuple[int, ...], float]:
    """All ``k``-simplices with finite birth by scanning every (k+1)-subset.

    Subsets with a missing edge are skipped, since every birth function is
    infinite on them.
    """
    cand = [sigma for sigma in itertools.combinations(range(n), k + 1)
            if all(p in edge_births for p in itertools.combinations(sigma, 2))]
    if batch_fn is not None:
        births = list(batch_fn(np.array(cand, dtype=np.intp).reshape(len(cand), k + 1))) if cand else []
    else:
        births = [birth_fn(sigma) for sigma in cand]
    return {sigma: float(t) for sigma, t in zip(cand, births) if t < math.inf}


def _enforce_monotone(births: Dict[Tuple[int, ...], float]) -> None:
    for sigma in sorted(births, key=len):
        if len(sigma) < 3:
            continue
        top = 0.0
        for f in facets(sigma):
            if f not in births:
                raise RuntimeError(f"facet {f} of {sigma} is missing from the filtration")
            top = max(top, births[f])
        b = births[sigma]
        if b < top:
            if top - b > MONOTONE_TOL * max(1.0, top):
                raise RuntimeError(f"simplex {sigma} born at {b!r} before its facet at {top!r}")
            births[sigma] = top


def build_filtration(params: SparseParams, max_dim: int = 2, flavor="rips", mode: str = STRICT,
                     graph: Optional[SparseGraph] = None, relabel: bool = True) -> FilteredComplex:
    """The sparse filtration up to dimension ``max_dim``.

    Vertices are born at 0, edges come from :func:`construct_edges`, and
    higher simplices from :func:`find_simplices`. With ``relabel`` (the
    default) vertices carry original point indices; otherwise greedy ranks.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be non-negative")
    flavor = Flavor.parse(flavor)
    if flavor is Flavor.CECH and params.metric is MetricKind.L1:
        raise ValueError("the Čech flavor is only available for l2 and linf clouds; use rips for l1")
    births: Dict[Tuple[int, ...], float] = {(v,): 0.0 for v in range(params.n)}
    if max_dim >= 1:
        G = graph if graph is not None else construct_edges(params, mode)
        births.update(G.births())
        if max_dim >= 2:
            fn = batch_birth_function(params, flavor, G, mode)
            adj = G.adjacency()
            for k in range(2, max_dim + 1):
                births.update(find_simplices(G, k, adjacency=adj, batch_fn=fn))
    _enforce_monotone(births)
    fc = FilteredComplex.from_births(births, max_dim)
    if relabel:
        fc = fc.relabel(params.gp.order)
    return fc
