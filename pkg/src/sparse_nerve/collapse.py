"""Links, the link condition and edge contraction of the last greedy point."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Set, Tuple

import numpy as np

from .balls import SparseParams, _sample_in_ball, covering_witness, radius
from .neighbors import STRICT
from .persistence import betti_numbers
from .simplices import build_filtration

Simplex = Tuple[int, ...]


class SimplicialComplex:
    """A finite simplicial complex stored as a set of sorted vertex tuples.

    Parameters
    ----------
    simplices : iterable of vertex collections
    close : bool, default True
        Add every face of every simplex. With ``close=False`` the input
        must already be closed under faces.
    """

    def __init__(self, simplices: Iterable[Iterable[int]] = (), close: bool = True):
        S: Set[Simplex] = set()
        for s in simplices:
            s = tuple(sorted(set(int(v) for v in s)))
            if not s:
                continue
            if close:
                for k in range(1, len(s) + 1):
                    S.update(itertools.combinations(s, k))
            else:
                S.add(s)
        self.simplices: FrozenSet[Simplex] = frozenset(S)
        if not close:
            self.check_closed()

    def check_closed(self) -> None:
        for s in self.simplices:
            for k in range(len(s)):
                f = s[:k] + s[k + 1:]
                if f and f not in self.simplices:
                    raise ValueError(f"face {f} of {s} is missing")

    @property
    def vertices(self) -> List[int]:
        return sorted(s[0] for s in self.simplices if len(s) == 1)

    @property
    def dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def __contains__(self, sigma) -> bool:
        return tuple(sorted(sigma)) in self.simplices

    def __len__(self):
        return len(self.simplices)

    def __eq__(self, other):
        return isinstance(other, SimplicialComplex) and self.simplices == other.simplices

    def __repr__(self):
        return f"SimplicialComplex({len(self.vertices)} vertices, {len(self)} simplices)"


def link(K: SimplicialComplex, sigma: Iterable[int]) -> Set[Simplex]:
    """``{tau - sigma : tau in K, sigma <= tau}``; contains the empty tuple."""
    sigma = tuple(sorted(set(sigma)))
    if sigma not in K.simplices:
        raise ValueError(f"{sigma} is not a simplex of the complex")
    s = set(sigma)
    return {tuple(v for v in tau if v not in s) for tau in K.simplices if s.issubset(tau)}


def satisfies_link_condition(K: SimplicialComplex, u: int, v: int,
                             max_dim: Optional[int] = None) -> bool:
    """Whether ``Lk{u,v}`` equals ``Lk{u} & Lk{v}``.

    When ``K`` is the ``max_dim``-skeleton of a larger complex, pass
    ``max_dim`` to compare only sets ``J`` with ``J + {u, v}`` of dimension
    at most ``max_dim``; the answer is then the one for the larger complex.
    """
    if (min(u, v), max(u, v)) not in K.simplices or u == v:
        raise ValueError(f"({u}, {v}) is not an edge of the complex")
    common = link(K, [u]) & link(K, [v])
    if max_dim is not None:
        common = {J for J in common if len(J) <= max_dim - 1}
    return link(K, [u, v]) == common


def contract_edge(K: SimplicialComplex, u: int, v: int) -> SimplicialComplex:
    """Identify ``u`` with ``v`` (``u`` disappears) and merge duplicates."""
    if (min(u, v), max(u, v)) not in K.simplices or u == v:
        raise ValueError(f"({u}, {v}) is not an edge of the complex")
    return SimplicialComplex((tuple(v if w == u else w for w in s) for s in K.simplices),
                             close=False)


def find_collapse_partner(params: SparseParams) -> int:
    """Greedy rank whose ball swallows the last point's ball at its removal time."""
    if params.n < 2:
        raise ValueError("need at least two points")
    last = params.n - 1
    return covering_witness(params, last, float(params.removal[last]))


@dataclass
class CollapseReport:
    """Checks run around the contraction of the last point onto its partner.

    Vertices are greedy ranks.
    """

    last: int
    partner: int
    alpha: float
    max_dim: int
    ball_contained: bool
    samples_outside: int
    link_condition: bool
    betti_before: List[int] = field(default_factory=list)
    betti_after: List[int] = field(default_factory=list)
    n_simplices: int = 0

    @property
    def ok(self) -> bool:
        return (self.ball_contained and self.samples_outside == 0 and self.link_condition
                and self.betti_before == self.betti_after)

    def to_text(self) -> str:
        return "\n".join([
            f"last vertex (rank)   {self.last}",
            f"partner (rank)       {self.partner}",
            f"alpha                {self.alpha!r}",
            f"simplices at alpha   {self.n_simplices}",
            f"ball contained       {self.ball_contained} ({self.samples_outside} samples outside)",
            f"link condition       {self.link_condition}",
            f"betti before         {self.betti_before}",
            f"betti after          {self.betti_after}",
            f"result               {'ok' if self.ok else 'FAILED'}",
        ])


def complex_at(params: SparseParams, alpha: float, max_dim: int = 2, flavor="cech",
               mode: str = STRICT) -> SimplicialComplex:
    """The sparse complex at scale ``alpha`` on greedy ranks, up to ``max_dim``."""
    fc = build_filtration(params, max_dim, flavor, mode, relabel=False)
    return SimplicialComplex(fc.at(alpha), close=False)


def check_collapse(params: SparseParams, max_dim: int = 2, flavor="cech", mode: str = STRICT,
                   n_samples: int = 200, rng=None) -> CollapseReport:
    """Contract the last point onto :func:`find_collapse_partner` and audit it.

    The complex is the sparse ``max_dim``-skeleton at the last removal
    time. Ball containment is checked both by the radius inequality and by
    sampling; Betti numbers are compared below ``max_dim``.
    """
    rng = np.random.default_rng(rng)
    last = params.n - 1
    alpha = float(params.removal[last])
    partner = find_collapse_partner(params)
    r_last = radius(params, last, alpha)
    r_partner = radius(params, partner, alpha)
    contained = params.dist(last, partner) + r_last <= r_partner
    outside = 0
    for _ in range(n_samples):
        x = _sample_in_ball(rng, params.points[last], r_last, params.metric, rng.random() < 0.5)
        if params.point_dist(partner, x) > r_partner:
            outside += 1
    K = complex_at(params, alpha, max_dim, flavor, mode)
    ok = satisfies_link_condition(K, last, partner, max_dim)
    top = max_dim - 1
    before = betti_numbers(K.simplices, top)
    after = betti_numbers(contract_edge(K, last, partner).simplices, top)
    return CollapseReport(last, partner, alpha, max_dim, bool(contained), outside, ok,
                          before, after, len(K))
