"""Command-line front end.

Subcommands: ``gbf`` and ``kernel`` evaluate at a point and print one JSON
object, ``density`` writes a CSV grid, ``validate`` runs the cross-route
suites.  Exit codes: 0 success, 1 usage or domain error, 2 non-convergence,
3 validation failures.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .dunkl import FDControl, density_L_values, dunkl_kernel, dunkl_kernel_prop2
from .errors import ConvergenceError, DegenerateInputError
from .gbf import (
    Multiplicity,
    convex_hull_contains,
    convex_hull_polygon,
    density_H_values,
    dh_density_values,
    gbf,
    gbf_laplace,
)
from .validate import SUITES, SuiteConfig, report_json, run_suite

__all__ = ["main", "cmd_gbf", "cmd_kernel", "cmd_density", "cmd_validate"]

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED, EXIT_FAILED = 0, 1, 2, 3
_PAIR_FLAGS = ("--x", "--y", "--k")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _fmt(v):
    return format(float(v), ".17g")


def _pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number pair: {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"non-finite value in {text!r}")
    return vals


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _grid_size(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 3 or n % 2 == 0:
        raise argparse.ArgumentTypeError("grid size must be odd and at least 3")
    return n


def _multiplicity(pair):
    try:
        return Multiplicity(*pair)
    except ValueError as exc:
        raise DegenerateInputError(str(exc)) from None


def _print_value(value, err, method, converged):
    print('{"value": %s, "err_estimate": %s, "method": "%s"}'
          % (_fmt(value), _fmt(err), method))
    return EXIT_OK if converged else EXIT_NONCONVERGED


def cmd_gbf(args):
    k = _multiplicity(args.k)
    if args.method == "quadrature":
        res = gbf(args.x, args.y, k, args.tol)
    else:
        res = gbf_laplace(args.x, args.y, k, args.tol)
    return _print_value(res.value, res.err_estimate, args.method, res.converged)


def cmd_kernel(args):
    k = _multiplicity(args.k)
    if args.method == "corollary" or args.x == (0.0, 0.0) or args.y == (0.0, 0.0):
        res = dunkl_kernel(args.x, args.y, k, args.tol)
        return _print_value(res.value, res.err_estimate, args.method, res.converged)
    # the difference step dominates the error: compare h with 2h
    ctrl = FDControl.default(args.x)
    val = dunkl_kernel_prop2(args.x, args.y, k, tol=min(args.tol, 1e-10), ctrl=ctrl)
    coarse = dunkl_kernel_prop2(args.x, args.y, k, tol=min(args.tol, 1e-10),
                                ctrl=FDControl(2 * ctrl.h, ctrl.mirror_margin))
    err = abs(val - coarse) / 3.0
    return _print_value(val, err, args.method, err <= args.tol * (1.0 + abs(val)))


def density_grid(kind, y, k, n):
    """Axis coordinates and the ``n x n`` density grid (``[i, j]`` at ``(z1_i, z2_j)``)."""
    r = 1.05 * convex_hull_polygon(y).m
    axis = r * np.linspace(-1.0, 1.0, n)
    Z1, Z2 = np.meshgrid(axis, axis, indexing="ij")
    inside = np.array([convex_hull_contains(y, p) for p in zip(Z1.ravel(), Z2.ravel())])
    a, b = Z1.ravel()[inside], Z2.ravel()[inside]
    vals = np.zeros(Z1.size)
    if kind == "H":
        vals[inside] = density_H_values(y, k, a, b, 24, 20)
    elif kind == "L":
        vals[inside] = density_L_values(y, k, a, b, 24, 20)
    else:
        vals[inside] = dh_density_values(y, a, b, 24)
    return axis, vals.reshape(n, n)


def cmd_density(args):
    if args.kind == "DH":
        y1, y2 = args.y
        if not y1 > y2 > 0:
            raise DegenerateInputError("--kind DH needs y1 > y2 > 0")
        k = None
    else:
        if args.k is None:
            raise _UsageError(f"--kind {args.kind} needs --k")
        k = _multiplicity(args.k)
    axis, grid = density_grid(args.kind, args.y, k, args.grid)
    lines = ["z1,z2,value"]
    for i, a in enumerate(axis):
        for j, b in enumerate(axis):
            lines.append(f"{_fmt(a)},{_fmt(b)},{_fmt(grid[i, j])}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args):
    suites = SUITES if args.suite == "all" else (args.suite,)
    config = SuiteConfig(seed=args.seed, suites=suites)
    # open the report first so an unwritable path fails before the long run
    fh = open(args.report, "w", encoding="ascii") if args.report else None
    try:
        records = run_suite(config)
        text = report_json(config, records)
        if fh:
            fh.write(text)
        else:
            sys.stdout.write(text)
    finally:
        if fh:
            fh.close()
    failed = sum(not r.passed for r in records)
    print(f"{len(records) - failed} passed, {failed} failed", file=sys.stderr)
    return EXIT_OK if failed == 0 else EXIT_FAILED


def build_parser():
    p = _Parser(prog="dunklb2", description="B2 generalized Bessel function and Dunkl kernel")
    sub = p.add_subparsers(dest="command", required=True)

    def point_flags(sp, k_required=True):
        sp.add_argument("--y", type=_pair, required=True, help="y as a,b")
        sp.add_argument("--k", type=_pair, required=k_required, help="multiplicities k1,k2")

    g = sub.add_parser("gbf", help="generalized Bessel function D^W_k(x, y)")
    g.add_argument("--x", type=_pair, required=True, help="x as a,b")
    point_flags(g)
    g.add_argument("--method", choices=("quadrature", "laplace"), default="quadrature")
    g.add_argument("--tol", type=_positive, default=1e-7)
    g.set_defaults(func=cmd_gbf)

    kn = sub.add_parser("kernel", help="Dunkl kernel D_k(x, y)")
    kn.add_argument("--x", type=_pair, required=True, help="x as a,b")
    point_flags(kn)
    kn.add_argument("--method", choices=("corollary", "shift"), default="corollary")
    kn.add_argument("--tol", type=_positive, default=1e-7)
    kn.set_defaults(func=cmd_kernel)

    d = sub.add_parser("density", help="density on a grid over the hull's bounding box, as CSV")
    d.add_argument("--kind", choices=("H", "L", "DH"), required=True)
    point_flags(d, k_required=False)
    d.add_argument("--grid", type=_grid_size, default=101, help="odd number of points per axis")
    d.add_argument("--out", help="CSV file (default: stdout)")
    d.set_defaults(func=cmd_density)

    v = sub.add_parser("validate", help="run the cross-route validation suites")
    v.add_argument("--suite", choices=("all",) + SUITES, default="all")
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--report", help="JSON report file (default: stdout)")
    v.set_defaults(func=cmd_validate)
    return p


def _join_pairs(argv):
    # "--x -0.3,0.4" would read the value as a flag; glue it to its option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _PAIR_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_pairs(argv))
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (DegenerateInputError, ValueError, OverflowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
