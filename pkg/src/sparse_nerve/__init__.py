"""Sparse Čech and Rips filtrations built from greedy permutations."""

__version__ = "0.1.0"

from .balls import (ConePoint, SparseParams, ball_radius_or_empty, cone_contains, covering_witness,
                    perturbed_offsets_contains, radius, removal_time)
from .collapse import (SimplicialComplex, check_collapse, contract_edge, find_collapse_partner, link,
                       satisfies_link_condition)
from .estimator import SparseNerve
from .greedy import GreedyPermutation, greedy_permutation, verify_net_property
from .metric import MetricKind, PointCloud, read_points
from .neighbors import (NeighborStructure, SparseGraph, brute_force_edges, check_invariants_bruteforce,
                        construct_edges, edge_birth_time)
from .persistence import (Barcode, MatchResult, barcode_approx_check, betti_numbers, compute_barcode,
                          full_cech_filtration_l2, full_rips_filtration)
from .simplices import FilteredComplex, FilteredSimplex, Flavor, build_filtration, find_simplices

__all__ = [
    "Barcode", "ConePoint", "FilteredComplex", "FilteredSimplex", "Flavor", "GreedyPermutation",
    "MatchResult", "MetricKind", "NeighborStructure", "PointCloud", "SimplicialComplex", "SparseGraph",
    "SparseNerve", "SparseParams", "ball_radius_or_empty", "barcode_approx_check", "betti_numbers",
    "brute_force_edges", "build_filtration", "check_collapse", "check_invariants_bruteforce",
    "compute_barcode", "cone_contains", "construct_edges", "contract_edge", "covering_witness",
    "edge_birth_time", "find_collapse_partner", "find_simplices", "full_cech_filtration_l2",
    "full_rips_filtration", "greedy_permutation", "link", "perturbed_offsets_contains", "radius",
    "read_points", "removal_time", "satisfies_link_condition", "verify_net_property",
]
