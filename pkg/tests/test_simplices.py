import itertools
import math

import numpy as np
import pytest

from sparse_nerve.neighbors import construct_edges, edge_birth_time
from sparse_nerve.neighbors import SparseGraph
from sparse_nerve.simplices import (FilteredComplex, FilteredSimplex, Flavor, batch_birth_function,
                                    birth_function, brute_force_simplices, build_filtration,
                                    cech_l2_births, enumerate_cliques, find_simplices,
                                    simplex_birth_time_cech_l2, simplex_birth_time_cech_linf,
                                    simplex_birth_time_rips)

from conftest import line_cloud, make_params


def cech_oracle(p, sigma):
    """Independent convex-program oracle for the Euclidean birth of ``sigma``."""
    cp = pytest.importorskip("cvxpy")
    sigma = list(sigma)
    top = float(p.removal[sigma].min())
    x = cp.Variable(p.points.shape[1])
    a = cp.Variable()
    cons = [a >= 0]
    for j in sigma:
        cons.append(cp.norm(x - p.points[j]) <= a)
        cons.append(cp.norm(x - p.points[j]) <= p.caps[j])
    prob = cp.Problem(cp.Minimize(a), cons)
    prob.solve(solver="CLARABEL")
    if prob.status not in ("optimal", "optimal_inaccurate"):
        return math.inf
    return float(a.value) if a.value <= top * (1 + 1e-7) else math.inf


def test_rips_birth_examples():
    p = make_params(line_cloud([0, 100, 200]), 0.5)
    births = {(0, 1): 1.0, (0, 2): 2.0, (1, 2): 3.0}
    assert simplex_birth_time_rips(p, (0, 1, 2), births) == 3.0
    object.__setattr__(p, "removal", np.array([math.inf, 10.0, 2.5]))
    assert simplex_birth_time_rips(p, (0, 1, 2), births) == math.inf
    assert simplex_birth_time_rips(p, (1,), births) == 0.0
    assert simplex_birth_time_rips(p, (0, 1, 2), {(0, 1): 1.0, (0, 2): 2.0}) == math.inf


def test_cech_birth_examples():
    huge = make_params([[0.0, 0.0], [2.0, 0.0], [1.0, math.sqrt(3)], [1000.0, 0.0]], 0.5)
    ranks = [int(np.flatnonzero(huge.gp.order == k)[0]) for k in range(3)]
    a, b, c = ranks
    assert simplex_birth_time_cech_l2(huge, (a, b)) == pytest.approx(1.0, rel=1e-12)
    assert simplex_birth_time_cech_l2(huge, (a, b)) == pytest.approx(edge_birth_time(huge, a, b), rel=1e-12)
    assert simplex_birth_time_cech_l2(huge, (a, b, c)) == pytest.approx(2 / math.sqrt(3), rel=1e-12)
    assert simplex_birth_time_cech_l2(huge, (a,)) == 0.0
    # pairs farther apart than the sum of their caps never meet
    far = make_params([[0.0, 0.0], [10.0, 0.0], [10.1, 0.0], [0.1, 0.0]], 0.5)
    apart = [(i, j) for i, j in itertools.combinations(range(4), 2)
             if far.dist(i, j) > far.caps[i] + far.caps[j]]
    assert apart
    for i, j in apart:
        assert simplex_birth_time_cech_l2(far, (i, j)) == math.inf
        k = next(v for v in range(4) if v not in (i, j))
        assert simplex_birth_time_cech_l2(far, tuple(sorted((i, j, k)))) == math.inf


def test_cech_needs_l2():
    p = make_params(line_cloud([0, 1]), 0.5, "l1")
    with pytest.raises(ValueError):
        simplex_birth_time_cech_l2(p, (0, 1))
    with pytest.raises(ValueError):
        build_filtration(p, 2, "cech")


def test_cech_l2_against_convex_oracle(rng):
    for trial in range(4):
        p = make_params(rng.uniform(size=(25, 2 + trial % 2)), [0.3, 0.5, 1.0, 0.5][trial])
        G = construct_edges(p)
        for k in (2, 3):
            cand = enumerate_cliques(G, k)
            pick = cand[rng.choice(len(cand), min(40, len(cand)), replace=False)]
            ours = cech_l2_births(p, pick)
            for sigma, t in zip(pick.tolist(), ours):
                o = cech_oracle(p, sigma)
                if o == math.inf or t == math.inf:
                    # only borderline cases may disagree on finiteness
                    top = p.removal[sigma].min()
                    assert min(o, t) >= top * (1 - 1e-6)
                else:
                    assert t == pytest.approx(o, rel=1e-6, abs=1e-9)


def test_cech_pairs_match_edges(rng):
    for _ in range(5):
        p = make_params(rng.uniform(size=(30, 2)), float(rng.choice([0.3, 0.5, 0.9])))
        for i, j in itertools.combinations(range(p.n), 2):
            e = edge_birth_time(p, i, j)
            c = simplex_birth_time_cech_l2(p, (i, j))
            if e == math.inf:
                assert c == math.inf or c >= p.removal[[i, j]].min() * (1 - 1e-9)
            else:
                assert abs(c - e) <= 1e-8 * max(1.0, e)


def test_scalar_and_batch_agree(rng):
    p = make_params(rng.uniform(size=(30, 2)), 0.5)
    G = construct_edges(p)
    cand = enumerate_cliques(G, 3)
    batch = cech_l2_births(p, cand)
    for row, b in zip(cand[:100].tolist(), batch[:100]):
        assert simplex_birth_time_cech_l2(p, row) == b


def test_linf_cech_equals_rips(rng):
    for n in (10, 20, 30):
        X = rng.uniform(size=(n, 3))
        for eps in (0.3, 1.0):
            p = make_params(X, eps, "linf")
            rips = build_filtration(p, 3, "rips")
            cech = build_filtration(p, 3, "cech")
            assert rips.simplices == cech.simplices
    G = construct_edges(p)
    births = G.births()
    for sigma in enumerate_cliques(G, 2)[:50].tolist():
        assert simplex_birth_time_cech_linf(p, sigma) == simplex_birth_time_rips(p, sigma, births)


def test_find_simplices_examples():
    G = SparseGraph(4)
    G.add(1, 0, 1.0)
    G.add(2, 1, 1.0)
    G.add(3, 2, 1.0)
    assert find_simplices(G, 2, lambda s: 1.0) == {}
    p = make_params([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1]], 0.5)
    G = construct_edges(p)
    fn = birth_function(p, "rips", G)
    found = find_simplices(G, 2, fn)
    assert list(found) == [(0, 1, 2)]
    assert found[(0, 1, 2)] == fn((0, 1, 2))
    with pytest.raises(ValueError):
        find_simplices(G, 0, fn)


@pytest.mark.parametrize("flavor,metric", [("rips", "l2"), ("rips", "l1"), ("cech", "l2"), ("cech", "linf")])
def test_clique_completeness(rng, flavor, metric):
    for _ in range(2):
        p = make_params(rng.uniform(size=(40, 2)), float(rng.choice([0.3, 0.5])), metric)
        G = construct_edges(p)
        edges = G.births()
        fn = birth_function(p, flavor, G)
        batch = batch_birth_function(p, flavor, G)
        for k in (2, 3):
            fast = find_simplices(G, k, batch_fn=batch)
            assert fast == brute_force_simplices(p.n, k, None, edges, batch_fn=batch)
            if flavor == "rips":
                assert fast == find_simplices(G, k, fn)


def test_build_single_vertex():
    fc = build_filtration(make_params([[1.0, 2.0]], 0.5), 2)
    assert fc.simplices == [FilteredSimplex((0,), 0.0)]


def test_build_far_apart():
    p = make_params(line_cloud([0.0, 100.0, 1000.0]), 0.5)
    fc = build_filtration(p, 2)
    verts = [s for s in fc if s.dim == 0]
    assert len(verts) == 3 and all(s.birth == 0 for s in verts)
    edges = {s.vertices: s.birth for s in fc if s.dim == 1}
    rank = p.gp.rank
    expect = {}
    for a, b in itertools.combinations(range(3), 2):
        t = edge_birth_time(p, int(rank[a]), int(rank[b]))
        if t < math.inf:
            expect[(a, b)] = t
    assert edges == expect


@pytest.mark.parametrize("flavor", ["rips", "cech"])
def test_build_is_valid(rng, flavor):
    for trial in range(5):
        X = rng.uniform(size=(int(rng.integers(5, 60)), 2))
        if trial == 0:
            X = np.vstack([X, X[:3]])
        p = make_params(X, float(rng.choice([0.3, 0.5, 1.0])))
        fc = build_filtration(p, 3 if flavor == "rips" else 2, flavor)
        fc.validate()
        births = fc.births()
        for s in fc:
            for f in itertools.combinations(s.vertices, len(s.vertices) - 1):
                if f:
                    assert births[f] <= s.birth
        assert build_filtration(p, 3 if flavor == "rips" else 2, flavor).simplices == fc.simplices


def test_validate_rejects_bad_input():
    with pytest.raises(ValueError, match="missing"):
        FilteredComplex([FilteredSimplex((0,), 0.0), FilteredSimplex((0, 1), 1.0)]).validate()
    with pytest.raises(ValueError, match="order"):
        FilteredComplex([FilteredSimplex((0,), 1.0), FilteredSimplex((1,), 0.0)]).validate()
    with pytest.raises(ValueError):
        FilteredComplex([FilteredSimplex((1, 0), 0.0)]).validate()


def test_text_roundtrip(rng):
    p = make_params(rng.uniform(size=(30, 2)), 0.5)
    fc = build_filtration(p, 2)
    text = fc.to_text()
    first = text.splitlines()[0].split()
    assert first[:2] == ["0.0", "0"]
    back = FilteredComplex.from_text(text)
    assert back.simplices == fc.simplices
    with pytest.raises(ValueError):
        FilteredComplex.from_text("0.0 1 0\n")


def test_flavor_parse():
    assert Flavor.parse("Cech") is Flavor.CECH
    with pytest.raises(ValueError):
        Flavor.parse("alpha")
