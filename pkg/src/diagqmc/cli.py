"""Command-line front end: point dumps, single estimates, sweeps, verifiers.

Exit codes: 0 success, 1 a verification suite failed, 2 bad configuration,
3 unsupported method/integrand combination, 4 degenerate analysis (a rate
fit rejected its input or a quadrature refused to converge).

Every command is deterministic for fixed flags: randomized modes take their
entropy only from --seed, and CSV/JSON is rendered from full-precision
reprs, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys

from diagqmc.analysis import (
    DegenerateFitError,
    OracleConvergenceError,
    extension_gap,
    fit_rate,
    oracle_integral,
    oracle_strip_integral,
    rate_fit_dict,
    run_sweep,
    sweep_csv,
    synthetic_records,
    variation_terms,
)
from diagqmc.integrands import (
    SingularEvaluationError,
    UnsupportedIntegrandError,
    constant,
    def1_check,
    def2_check,
    diag_ripple,
    modulated,
    prototype,
    transformed,
)
from diagqmc.lowdisc import halton_points, uniform_points
from diagqmc.quad import (
    epsilon_schedule,
    estimate_extension,
    estimate_mc,
    estimate_strip,
    estimate_transform,
    strip_triangles,
    truncation_bound,
)
from diagqmc.trianglepts import (
    REFERENCE,
    cell_indices,
    triangle_dict,
    tvdc_points,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_UNSUPPORTED = 3
EXIT_DEGENERATE = 4


def _parse_n_grid(text: str):
    """`b^lo..b^hi` expands to powers of b; otherwise a comma list of ints."""
    try:
        if ".." in text:
            lo_part, hi_part = text.split("..", 1)
            b1, e1 = lo_part.split("^", 1)
            b2, e2 = hi_part.split("^", 1)
            if int(b1) != int(b2):
                raise ValueError("range endpoints must use the same base")
            base, lo, hi = int(b1), int(e1), int(e2)
            if hi < lo:
                raise ValueError("range is empty")
            return [base**k for k in range(lo, hi + 1)]
        return [int(tok) for tok in text.split(",")]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad n grid {text!r}: {e}") from None


def _parse_int_list(text: str):
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _build_integrand(args):
    if args.integrand == "proto":
        return prototype(args.A)
    if args.integrand == "modulated":
        return modulated(args.A, args.h)
    if args.integrand == "const":
        return constant(args.value, args.A)
    if args.integrand == "ripple":
        return diag_ripple(args.A)
    raise ValueError(f"unknown integrand {args.integrand!r}")


def _reference_mu(f):
    """Oracle integral when any path exists, else None (no abs_error then)."""
    if f.exact_integral is None and f.modulator is None:
        return None
    return oracle_integral(f)


# -- points --------------------------------------------------------------------


def _points_triangle(args):
    if args.triangle == "reference":
        return REFERENCE
    if args.epsilon is None:
        raise ValueError(f"--triangle {args.triangle} needs --epsilon")
    geom = strip_triangles(args.epsilon)
    return geom.upper if args.triangle == "upper" else geom.lower


def cmd_points(args) -> int:
    if args.n < 1:
        raise ValueError("--n must be >= 1")
    tri = None
    if args.generator == "halton":
        pts = halton_points(args.n, args.start_index)
        indices = range(args.start_index, args.start_index + args.n)
    elif args.generator == "tvdc":
        tri = _points_triangle(args)
        pts = tvdc_points(tri, args.n)
        indices = range(args.n)
    else:  # uniform
        pts = uniform_points(args.n, args.seed)
        indices = range(args.n)

    if args.format == "csv":
        lines = ["index,x1,x2"]
        lines += [
            f"{i},{_fmt(p[0])},{_fmt(p[1])}" for i, p in zip(indices, pts)
        ]
        _emit(args, "\n".join(lines) + "\n")
    else:
        payload = {"generator": args.generator, "n": args.n}
        if args.generator == "halton":
            payload["start_index"] = args.start_index
        if tri is not None:
            payload["triangle"] = triangle_dict(tri)
        if args.generator == "uniform":
            payload["seed"] = args.seed
        payload["points"] = [
            {"index": int(i), "x1": float(p[0]), "x2": float(p[1])}
            for i, p in zip(indices, pts)
        ]
        _emit(args, _json(payload))
    return EXIT_OK


# -- integrate -----------------------------------------------------------------


def _resolve_replicates(args, default: int) -> int:
    return default if args.replicates is None else args.replicates


def cmd_integrate(args) -> int:
    f = _build_integrand(args)
    if args.method == "strip":
        est = estimate_strip(
            f, args.n, c=args.c, eps_override=args.epsilon, eps_max=args.eps_max
        )
    elif args.method == "extension":
        eps = args.epsilon
        if eps is None:
            eps = epsilon_schedule(args.n, args.c, args.eps_max)
        est = estimate_extension(f, args.n, eps)
    elif args.method == "transform":
        est = estimate_transform(
            f,
            args.n,
            mode=args.mode,
            replicates=_resolve_replicates(args, 32),
            seed=args.seed,
        )
    else:  # mc
        est = estimate_mc(f, args.n, args.seed, replicates=_resolve_replicates(args, 1))

    payload = {
        "method": est.method,
        "integrand": f.name,
        "A": f.A,
        "n": est.n_per_component,
        "epsilon": est.epsilon,
        "value": est.value,
    }
    mu = _reference_mu(f)
    if mu is not None:
        payload["abs_error"] = abs(est.value - mu)
    payload["replicates"] = est.replicates
    if est.replicate_sd is not None:
        payload["replicate_sd"] = est.replicate_sd
    if est.seed is not None:
        payload["seed"] = est.seed
    _emit(args, _json(payload))
    return EXIT_OK


# -- sweep ---------------------------------------------------------------------


def _record_dict(r):
    return {
        "method": r.method,
        "integrand": r.integrand,
        "A": r.A,
        "n_total": r.n_total,
        "epsilon": r.epsilon,
        "estimate": r.estimate,
        "abs_error": r.abs_error,
        "replicates": r.replicates,
        "stderr": r.stderr,
    }


def cmd_sweep(args) -> int:
    if len(args.n_grid) < 3:
        raise ValueError("--n-grid needs at least 3 points for a rate fit")
    if args.synthetic_slope is not None:
        records = synthetic_records(args.synthetic_slope, args.n_grid)
    else:
        method = args.method
        if method == "transform":
            method = f"transform-{args.mode}"
        f = _build_integrand(args)
        records = run_sweep(
            method,
            f,
            args.n_grid,
            c=args.c,
            replicates=_resolve_replicates(args, 1),
            seed=args.seed,
        )

    csv_text = sweep_csv(records)
    try:
        fit = fit_rate(records)
    except DegenerateFitError as e:
        if args.format == "csv":
            _emit(args, csv_text)
        else:
            _emit(args, _json({"records": [_record_dict(r) for r in records], "fit": None}))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    if args.format == "csv":
        _emit(args, csv_text + json.dumps(rate_fit_dict(fit)) + "\n")
    else:
        _emit(
            args,
            _json(
                {
                    "records": [_record_dict(r) for r in records],
                    "fit": rate_fit_dict(fit),
                }
            ),
        )
    return EXIT_OK


# -- verify --------------------------------------------------------------------

_VERIFY_EPS = (1e-1, 1e-2, 1e-3)


def _verify_def1(args):
    f = _build_integrand(args)
    grids = tuple(args.grids) if args.grids else (32, 64)
    rep = def1_check(f, grid_sizes=grids)
    report = {
        "suite": "def1",
        "integrand": f.name,
        "A": f.A,
        "B": f.B,
        "band": rep.band,
        "max_ratio": rep.max_ratio,
        "near_ratio": rep.near_ratio,
        "passed": rep.passed,
    }
    return report, rep.passed, "def1: envelope ratio exceeds B (1 + slack)"


def _verify_def2(args):
    f = _build_integrand(args)
    grids = tuple(args.grids) if args.grids else (32, 64, 128)
    g = transformed(f, "upper")
    rep = def2_check(g, f.A, f.A / 2.0, grid_sizes=grids)
    sizes = sorted(grids)
    coarse, fine = rep.max_ratio[sizes[0]], rep.max_ratio[sizes[-1]]
    growing = [k for k in ("g", "g10", "g01", "g11") if fine[k] > coarse[k] * 1.1]
    report = {
        "suite": "def2",
        "integrand": f.name,
        "A1": rep.A1,
        "A2": rep.A2,
        "max_ratio": rep.max_ratio,
        "constants": rep.constants,
        "passed": rep.passed,
    }
    detail = ", ".join(growing) if growing else "non-finite ratio"
    return report, rep.passed, f"def2: envelope constant grows across grids ({detail})"


def _verify_stratification(args):
    depth = args.depth
    if not 1 <= depth <= 8:
        raise ValueError("--depth must be between 1 and 8")
    n = 4**depth
    pts = tvdc_points(REFERENCE, n)
    cells = cell_indices(REFERENCE, pts, depth)
    distinct = len(set(int(c) for c in cells))
    report = {
        "suite": "stratification",
        "depth": depth,
        "cells": n,
        "distinct": distinct,
        "passed": distinct == n,
    }
    return report, distinct == n, "stratification: a level cell holds two points"


def _verify_truncation(args):
    f = prototype(args.A)
    rows = []
    ok = True
    for eps in _VERIFY_EPS:
        mass = oracle_strip_integral(f, eps)
        bound = truncation_bound(1.0, args.A, eps)
        rows.append(
            {"epsilon": eps, "strip_mass": mass, "bound": bound, "ratio": mass / bound}
        )
        ok = ok and mass <= bound
    report = {"suite": "truncation", "A": args.A, "rows": rows, "passed": ok}
    return report, ok, "truncation: band mass exceeds the bound"


def _verify_extension_gap(args):
    rows = []
    scaled = []
    for eps in _VERIFY_EPS:
        gap = extension_gap(args.A, eps)
        scaled.append(gap / eps ** (1.0 - args.A))
        rows.append({"epsilon": eps, "gap": gap, "gap_scaled": scaled[-1]})
    spread = max(scaled) / min(scaled)
    ok = spread <= 1.25
    report = {
        "suite": "extension-gap",
        "A": args.A,
        "rows": rows,
        "spread": spread,
        "passed": ok,
    }
    return report, ok, "extension-gap: scaled gap varies by more than 25%"


def _verify_variation(args):
    f = _build_integrand(args)
    eps_hi, eps_lo = 1e-1, 1e-2
    rep_hi = variation_terms(f, eps_hi)
    rep_lo = variation_terms(f, eps_lo)
    tot_hi = rep_hi.group_totals()
    tot_lo = rep_lo.group_totals()
    ratio = tot_lo[2] / tot_hi[2]
    target = 10.0 ** (f.A + 1.0)
    ok = abs(ratio / target - 1.0) <= 0.25
    report = {
        "suite": "variation",
        "integrand": f.name,
        "A": f.A,
        "epsilons": [eps_hi, eps_lo],
        "group_totals": {
            "order_1": [tot_hi[0], tot_lo[0]],
            "order_eps_A": [tot_hi[1], tot_lo[1]],
            "order_eps_A1": [tot_hi[2], tot_lo[2]],
        },
        "dominant_ratio": ratio,
        "target": target,
        "passed": ok,
    }
    return report, ok, "variation: dominant group off its epsilon scaling"


_SUITES = {
    "def1": _verify_def1,
    "def2": _verify_def2,
    "stratification": _verify_stratification,
    "truncation": _verify_truncation,
    "extension-gap": _verify_extension_gap,
    "variation": _verify_variation,
}


def cmd_verify(args) -> int:
    report, passed, fail_msg = _SUITES[args.suite](args)
    _emit(args, _json(report))
    if not passed:
        print(fail_msg, file=sys.stderr)
        return EXIT_VERIFY_FAIL
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _add_integrand_flags(p):
    p.add_argument(
        "--integrand",
        choices=("proto", "modulated", "const", "ripple"),
        default="proto",
    )
    p.add_argument("--A", type=float, default=0.5, help="singularity exponent")
    p.add_argument("--h", choices=("one", "poly", "trig"), default="one")
    p.add_argument("--value", type=float, default=1.0, help="constant integrand value")


def _add_out_flags(p, formats=("csv", "json"), default="csv"):
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--out", default=None, help="output path (default stdout)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diagqmc",
        description="Quadrature on the unit square for diagonally singular integrands.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("points", help="dump generator output")
    p.add_argument("--generator", choices=("halton", "tvdc", "uniform"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--start-index", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--triangle", choices=("reference", "upper", "lower"), default="reference")
    p.add_argument("--epsilon", type=float, default=None, help="strip width for upper/lower")
    _add_out_flags(p)
    p.set_defaults(handler=cmd_points)

    p = sub.add_parser("integrate", help="one estimate as JSON")
    p.add_argument("--method", choices=("strip", "extension", "transform", "mc"), required=True)
    _add_integrand_flags(p)
    p.add_argument("--n", type=int, required=True, help="points per component")
    p.add_argument("--c", type=float, default=1.0, help="epsilon schedule constant")
    p.add_argument("--eps-max", type=float, default=0.25)
    p.add_argument("--epsilon", type=float, default=None, help="fixed band width override")
    p.add_argument("--mode", choices=("halton", "rqmc", "mc"), default="halton")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    _add_out_flags(p, formats=("json",), default="json")
    p.set_defaults(handler=cmd_integrate)

    p = sub.add_parser("sweep", help="convergence sweep plus rate fit")
    p.add_argument("--method", choices=("strip", "extension", "transform", "mc"), default="strip")
    _add_integrand_flags(p)
    p.add_argument("--n-grid", type=_parse_n_grid, required=True, help="e.g. 4^4..4^8 or 256,1024,4096")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--mode", choices=("halton", "rqmc", "mc"), default="halton")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--synthetic-slope", type=float, default=None, help="skip estimators; emit err = n^slope")
    _add_out_flags(p)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=tuple(_SUITES), required=True)
    _add_integrand_flags(p)
    p.add_argument("--depth", type=int, default=5, help="stratification depth")
    p.add_argument("--grids", type=_parse_int_list, default=None, help="grid sizes, e.g. 32,64")
    _add_out_flags(p, formats=("json",), default="json")
    p.set_defaults(handler=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except UnsupportedIntegrandError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (DegenerateFitError, OracleConvergenceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, SingularEvaluationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
