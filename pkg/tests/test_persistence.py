import itertools
import math

import numpy as np
import pytest

from sparse_nerve.datasets import noisy_circle
from sparse_nerve.persistence import (Barcode, bar_ratio, barcode_approx_check, betti_numbers, compute_barcode,
                                      full_cech_filtration_l2, full_rips_filtration, gf2_rank, pair_ratio)
from sparse_nerve.simplices import FilteredComplex, FilteredSimplex, build_filtration

from conftest import make_params


def fc_from(births):
    return FilteredComplex.from_births(births)


def test_single_vertex():
    assert compute_barcode(fc_from({(0,): 0.0})).intervals == [(0, 0.0, math.inf)]


def test_two_vertices_one_edge():
    B = compute_barcode(fc_from({(0,): 0.0, (1,): 0.0, (0, 1): 1.0}))
    assert sorted(B.intervals) == [(0, 0.0, 1.0), (0, 0.0, math.inf)]


def test_zero_length_counted():
    B = compute_barcode(fc_from({(0,): 0.0, (1,): 0.0, (0, 1): 0.0}))
    assert B.intervals == [(0, 0.0, math.inf)]
    assert B.zero_length == 1 and len(B.pairs) == 1


def test_hollow_and_filled_triangle():
    hollow = {(0,): 0.0, (1,): 0.0, (2,): 0.0, (0, 1): 1.0, (1, 2): 1.0, (0, 2): 2.0}
    B = compute_barcode(fc_from(hollow))
    assert B.in_dim(1) == [(2.0, math.inf)]
    B = compute_barcode(fc_from({**hollow, (0, 1, 2): 3.0}))
    assert B.in_dim(1) == [(2.0, 3.0)]


def test_unsorted_input_rejected():
    fc = FilteredComplex([FilteredSimplex((0, 1), 1.0), FilteredSimplex((0,), 0.0), FilteredSimplex((1,), 0.0)])
    with pytest.raises(ValueError):
        compute_barcode(fc)


def test_circle_has_one_dominant_loop():
    th = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    B = compute_barcode(full_rips_filtration(np.c_[np.cos(th), np.sin(th)], 2))
    long = [(b, d) for b, d in B.in_dim(1) if d / b > 2]
    assert len(long) == 1


def test_full_rips_examples():
    fc = full_rips_filtration([[0.0, 0.0], [2.0, 0.0]], 1)
    assert fc.births()[(0, 1)] == 1.0
    fc = full_rips_filtration([[0, 0], [2, 0], [1, math.sqrt(3)]], 2)
    assert fc.births()[(0, 1, 2)] == pytest.approx(1.0)
    fc.validate()


def test_full_rips_alpha_max(rng):
    X = rng.uniform(size=(15, 2))
    fc = full_rips_filtration(X, 2, alpha_max=0.2)
    fc.validate()
    assert all(s.birth <= 0.2 for s in fc)
    D = np.linalg.norm(X[:, None] - X[None], axis=2)
    for a, b, c in itertools.combinations(range(15), 3):
        inside = max(D[a, b], D[a, c], D[b, c]) / 2 <= 0.2
        assert ((a, b, c) in fc.births()) == inside


def test_full_cech_examples():
    assert full_cech_filtration_l2([[0.0, 0.0], [2.0, 0.0]], 1).births()[(0, 1)] == 1.0
    fc = full_cech_filtration_l2([[0, 0], [2, 0], [1, math.sqrt(3)]], 2)
    assert fc.births()[(0, 1, 2)] == pytest.approx(2 / math.sqrt(3), rel=1e-12)
    fc = full_cech_filtration_l2([[0.0], [1.0], [2.0]], 2)
    assert fc.births()[(0, 1, 2)] == pytest.approx(1.0, rel=1e-12)
    fc.validate()


def test_gf2_rank():
    assert gf2_rank(np.eye(4)) == 4
    assert gf2_rank([[1, 1, 0], [0, 1, 1], [1, 0, 1]]) == 2
    assert gf2_rank(np.zeros((3, 5))) == 0


def test_betti_numbers_small():
    assert betti_numbers([(0,), (1,), (2,), (0, 1), (1, 2), (0, 2)]) == [1, 1]
    assert betti_numbers([(0, 1, 2), (0, 1), (1, 2), (0, 2), (0,), (1,), (2,)]) == [1, 0, 0]
    sphere = [s for k in (1, 2, 3) for s in itertools.combinations(range(4), k)]
    assert betti_numbers(sphere) == [1, 0, 1]


def test_barcode_betti_against_rank(rng):
    for _ in range(10):
        n = int(rng.integers(4, 13))
        fc = full_rips_filtration(rng.uniform(size=(n, 2)), 2)
        B = compute_barcode(fc)
        for alpha in rng.choice([s.birth for s in fc], 3):
            simplices = fc.at(alpha)
            assert B.betti_at(alpha, 1) == betti_numbers(simplices, 1)


def test_reduction_pairs_are_ordered(rng):
    fc = full_rips_filtration(rng.uniform(size=(20, 2)), 2)
    B = compute_barcode(fc)
    for creator, destroyer in B.pairs:
        assert creator < destroyer
        assert fc.simplices[creator].birth <= fc.simplices[destroyer].birth
        assert fc.simplices[creator].dim + 1 == fc.simplices[destroyer].dim


def test_text_roundtrip():
    B = Barcode([(1, 0.5, 2.0), (0, 0.0, math.inf), (0, 0.0, 1.0)])
    text = B.to_text()
    assert text.splitlines() == ["0 0.0 1.0", "0 0.0 inf", "1 0.5 2.0"]
    assert Barcode.from_text(text).intervals == B.intervals


def test_ratios():
    assert pair_ratio((0.0, 2.0), (1e-12, 2.2)) == pytest.approx(1.1)
    assert pair_ratio((1.0, math.inf), (1.1, math.inf)) == pytest.approx(1.1)
    assert pair_ratio((1.0, 5.0), (1.0, math.inf)) == math.inf
    assert bar_ratio((0.0, 1.0)) == math.inf and bar_ratio((1.0, 3.0)) == 3.0


def test_approx_identity():
    B = Barcode([(0, 0.0, 1.0), (0, 0.0, math.inf), (1, 0.3, 0.9), (1, 0.4, 0.41)])
    res = barcode_approx_check(B, B, 1.0, find_worst=True)
    assert res.ok and res.worst_ratio == 1.0


def test_approx_scaled():
    bars = [(0, 0.0, 1.0), (0, 0.0, 2.5), (0, 0.0, math.inf), (1, 0.3, 0.9), (1, 1.0, 4.0)]
    B2 = Barcode(bars)
    B1 = Barcode([(d, b * 1.05, e * 1.05) for d, b, e in bars])
    assert barcode_approx_check(B1, B2, 1.05 * (1 + 1e-12)).ok
    assert not barcode_approx_check(B1, B2, 1.01).ok
    res = barcode_approx_check(B1, B2, 1.01, find_worst=True)
    assert res.worst_ratio == pytest.approx(1.05)
    assert res.failed_dims == [0, 1]


def test_short_bars_may_stay_unmatched():
    B1 = Barcode([(0, 0.0, math.inf), (1, 1.0, 1.2)])
    B2 = Barcode([(0, 0.0, math.inf)])
    assert barcode_approx_check(B1, B2, 1.5).ok
    assert not barcode_approx_check(B1, B2, 1.1).ok
    with pytest.raises(ValueError):
        barcode_approx_check(B1, B2, 0.5)


def test_infinite_vs_finite_inadmissible():
    B1 = Barcode([(0, 0.0, math.inf)])
    B2 = Barcode([(0, 0.0, 1e6)])
    assert not barcode_approx_check(B1, B2, 100.0).ok


@pytest.mark.parametrize("flavor", ["rips", "cech"])
def test_sparse_circle_matches_full(flavor):
    X = noisy_circle(60, seed=7)
    eps = 0.5
    p = make_params(X, eps)
    sparse = compute_barcode(build_filtration(p, 2, flavor))
    full = full_rips_filtration(X, 2) if flavor == "rips" else full_cech_filtration_l2(X, 2)
    res = barcode_approx_check(sparse, compute_barcode(full), 1 + eps, dims=[0, 1])
    assert res.ok
    # a single infinite class in dimension 0
    assert sum(1 for b, d in sparse.in_dim(0) if d == math.inf) == 1
