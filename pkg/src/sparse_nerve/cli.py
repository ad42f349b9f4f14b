"""Command line interface: ``sparse-nerve <command> ...``.

Exit codes: 0 on success, 1 when a verification fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from contextlib import contextmanager
from typing import List, Optional

from . import __version__
from .balls import SparseParams, sample_cone_convexity, sample_covering_lemma
from .collapse import check_collapse
from .datasets import KINDS, make_cloud
from .greedy import greedy_permutation
from .metric import MetricKind, PointCloud, read_points, write_points
from .neighbors import PAPER, STRICT, construct_edges
from .persistence import (barcode_approx_check, compute_barcode, full_cech_filtration_l2,
                          full_rips_filtration)
from .simplices import FilteredComplex, Flavor, build_filtration

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def thread_cap() -> Optional[int]:
    """Value of ``SPARSE_NERVE_THREADS``; every command currently runs on one thread."""
    raw = os.environ.get("SPARSE_NERVE_THREADS")
    if raw is None or raw.strip() == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"SPARSE_NERVE_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"SPARSE_NERVE_THREADS must be a positive integer, got {raw!r}")
    return value


@contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _cloud(args) -> PointCloud:
    try:
        return PointCloud(read_points(args.input), MetricKind.parse(args.metric))
    except OSError as exc:
        raise UsageError(str(exc)) from None


def _params(args) -> SparseParams:
    cloud = _cloud(args)
    if not 0 <= args.seed < cloud.n:
        raise UsageError(f"--seed must index a point (0..{cloud.n - 1})")
    return SparseParams(args.epsilon, cloud, greedy_permutation(cloud, args.seed),
                        args.allow_large_epsilon)


def cmd_greedy(args) -> int:
    cloud = _cloud(args)
    if not 0 <= args.seed < cloud.n:
        raise UsageError(f"--seed must index a point (0..{cloud.n - 1})")
    gp = greedy_permutation(cloud, args.seed)
    with _output(args.output) as fh:
        fh.write(gp.to_text())
    return EXIT_OK


def cmd_edges(args) -> int:
    params = _params(args)
    G = construct_edges(params, args.mode)
    with _output(args.output) as fh:
        fh.write(G.to_text(params.gp.order))
    return EXIT_OK


def _sparse(args, params):
    return build_filtration(params, args.max_dim, args.flavor, args.mode)


def cmd_build(args) -> int:
    fc = _sparse(args, _params(args))
    with _output(args.output) as fh:
        fh.write(fc.to_text())
    return EXIT_OK


def cmd_persist(args) -> int:
    if args.from_points:
        fc = _sparse(args, _params(args))
    else:
        try:
            with open(args.input, encoding="utf-8") as fh:
                fc = FilteredComplex.from_text(fh.read())
        except OSError as exc:
            raise UsageError(str(exc)) from None
    B = compute_barcode(fc)
    with _output(args.output) as fh:
        fh.write(B.to_text())
    print(f"# {len(B)} intervals, {B.zero_length} zero-length pairs", file=sys.stderr)
    return EXIT_OK


def full_filtration(params: SparseParams, flavor, max_dim: int, alpha_max=None) -> FilteredComplex:
    """The non-sparse filtration matching ``flavor`` and the cloud's metric."""
    flavor = Flavor.parse(flavor)
    if flavor is Flavor.CECH and params.metric is MetricKind.L2:
        return full_cech_filtration_l2(params.cloud, max_dim, alpha_max)
    if flavor is Flavor.CECH and params.metric is MetricKind.L1:
        raise UsageError("the cech flavor needs --metric l2 or linf")
    # max-norm Čech and Rips filtrations coincide
    return full_rips_filtration(params.cloud, max_dim, alpha_max)


def cmd_compare(args) -> int:
    params = _params(args)
    sparse = _sparse(args, params)
    full = full_filtration(params, args.flavor, args.max_dim, args.alpha_max)
    c = args.c if args.c is not None else 1 + params.epsilon
    dims = list(range(max(args.max_dim, 1)))
    res = barcode_approx_check(compute_barcode(sparse), compute_barcode(full),
                               c * (1 + args.rtol), find_worst=True, dims=dims)
    sc, fc = sparse.counts(), full.counts()
    with _output(args.output) as fh:
        fh.write(f"{'ok' if res.ok else 'FAILED'} at c = {c!r} (rtol {args.rtol!r})\n")
        fh.write(f"dimensions compared: {dims}\n")
        fh.write(f"worst_ratio = {res.worst_ratio!r}\n")
        fh.write(f"matched {len(res.matched)} pairs, {len(res.unmatched_ok)} short bars unmatched\n")
        if res.failed_dims:
            fh.write(f"no admissible matching in dims {res.failed_dims}\n")
        fh.write("dim sparse full\n")
        for d in range(args.max_dim + 1):
            fh.write(f"{d} {sc[d] if d < len(sc) else 0} {fc[d] if d < len(fc) else 0}\n")
        fh.write(f"total {len(sparse)} {len(full)}\n")
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_gen(args) -> int:
    kw = {}
    if args.dim is not None:
        if args.kind == "circle":
            raise UsageError("--dim does not apply to circle clouds")
        kw["dim"] = args.dim
    if args.noise is not None:
        if args.kind not in ("circle", "sphere"):
            raise UsageError("--noise applies to circle and sphere clouds")
        kw["noise"] = args.noise
    X = make_cloud(args.kind, args.n, args.seed, **kw)
    with _output(args.output) as fh:
        write_points(X, fh)
    return EXIT_OK


def cmd_check_covering(args) -> int:
    params = _params(args)
    cov = sample_covering_lemma(params, args.samples, args.rng_seed)
    cone = sample_cone_convexity(params, args.samples, args.rng_seed)
    with _output(args.output) as fh:
        for key, value in cov.items():
            fh.write(f"{key} {value}\n")
        fh.write(f"cone_ok {cone['ok']}\ncone_fail {cone['fail']}\n")
    bad = cov["clause1_fail"] + cov["clause2_fail"] + cone["fail"]
    return EXIT_OK if bad == 0 else EXIT_FAIL


def cmd_collapse_check(args) -> int:
    params = _params(args)
    if params.n < 2:
        raise UsageError("collapse-check needs at least two points")
    report = check_collapse(params, args.max_dim, args.flavor, args.mode, rng=args.rng_seed)
    with _output(args.output) as fh:
        fh.write(report.to_text() + "\n")
        fh.write(f"last vertex (index)  {int(params.gp.order[report.last])}\n")
        fh.write(f"partner (index)      {int(params.gp.order[report.partner])}\n")
    return EXIT_OK if report.ok else EXIT_FAIL


def _positive_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparse-nerve",
                                     description="Sparse Čech and Rips filtrations and their barcodes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    io = argparse.ArgumentParser(add_help=False)
    io.add_argument("input", help="point file (whitespace separated, one point per line)")
    io.add_argument("--metric", choices=[m.value for m in MetricKind], default="l2")
    io.add_argument("--seed", type=_nonneg_int, default=0, help="first point of the greedy permutation")
    io.add_argument("--output", "-o", default=None, help="output path (default stdout)")

    sparse = argparse.ArgumentParser(add_help=False)
    sparse.add_argument("--epsilon", type=_positive_float, default=0.5)
    sparse.add_argument("--allow-large-epsilon", action="store_true",
                        help="accept epsilon >= 1")
    sparse.add_argument("--mode", choices=[STRICT, PAPER], default=STRICT)

    filt = argparse.ArgumentParser(add_help=False)
    filt.add_argument("--max-dim", type=_nonneg_int, default=2)
    filt.add_argument("--flavor", choices=[f.value for f in Flavor], default="rips")

    p = sub.add_parser("greedy", parents=[io], help="greedy permutation")
    p.set_defaults(func=cmd_greedy)

    p = sub.add_parser("edges", parents=[io, sparse], help="edges with birth times")
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("build", parents=[io, sparse, filt], help="sparse filtration")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("persist", parents=[io, sparse, filt], help="barcode of a filtration")
    p.add_argument("--from-points", action="store_true",
                   help="treat the input as points and build the sparse filtration first")
    p.set_defaults(func=cmd_persist)

    p = sub.add_parser("compare", parents=[io, sparse, filt],
                       help="check the sparse barcode against the full one")
    p.add_argument("--alpha-max", type=_positive_float, default=None,
                   help="largest scale of the full filtration (default: diameter)")
    p.add_argument("--c", type=float, default=None, help="approximation factor (default 1 + epsilon)")
    p.add_argument("--rtol", type=float, default=1e-6, help="relative slack on c for rounding")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen", help="generate a sample cloud")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check-covering", parents=[io, sparse],
                       help="sample the covering and cone-convexity properties")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--rng-seed", type=int, default=0)
    p.set_defaults(func=cmd_check_covering)

    p = sub.add_parser("collapse-check", parents=[io, sparse, filt],
                       help="link condition for the last point and its partner")
    p.add_argument("--rng-seed", type=int, default=0)
    p.set_defaults(func=cmd_collapse_check, flavor="cech")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        thread_cap()
        if getattr(args, "flavor", None) == "cech" and getattr(args, "metric", "l2") == "l1":
            raise UsageError("the cech flavor needs --metric l2 or linf")
        return args.func(args)
    except UsageError as exc:
        print(f"sparse-nerve: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"sparse-nerve: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
