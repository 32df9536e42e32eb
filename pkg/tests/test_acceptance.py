"""Acceptance gate: one test and one reported line per shipped guarantee.

Each test prints ``criterion NN PASS/FAIL`` with the measured numbers, so a
verbose run reads as a checklist. Tolerances are stated inline; none of them
are tuned to the current outputs beyond the stated slack.
"""

import json
import math
import time

import numpy as np
import pytest

from diagqmc.analysis import (
    DegenerateFitError,
    SweepRecord,
    extension_gap,
    fit_rate,
    oracle_integral,
    oracle_strip_integral,
    run_sweep,
    variation_terms,
)
from diagqmc.cli import EXIT_OK, main
from diagqmc.integrands import def2_check, modulated, prototype, transformed
from diagqmc.quad import (
    estimate_strip,
    estimate_transform,
    truncation_bound,
)
from diagqmc.trianglepts import REFERENCE, cell_indices, tvdc_points

A_GRID = (0.3, 0.5, 0.7)


def _report(num, ok, detail):
    print(f"criterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num:02d}: {detail}"


def test_criterion_01_closed_form_recovery():
    t0 = time.perf_counter()
    worst = 0.0
    for A in (0.25, 0.5, 0.75):
        f = prototype(A)
        mu = 2.0 / ((1.0 - A) * (2.0 - A))
        for path in ("closed_form", "quadrature"):
            worst = max(worst, abs(oracle_integral(f, path=path) - mu))
    elapsed = time.perf_counter() - t0
    _report(
        1,
        worst < 1e-8 and elapsed < 10.0,
        f"both oracle paths within {worst:.2e} of the closed forms in {elapsed:.2f}s",
    )


def test_criterion_02_strip_rate():
    t0 = time.perf_counter()
    grid = [4**k for k in range(4, 9)]
    results = []
    ok = True
    for A in A_GRID:
        fit = fit_rate(run_sweep("strip", prototype(A), grid))
        bound = -(1.0 - A) / 2.0 + 0.10
        ok = ok and fit.slope <= bound and fit.r_squared >= 0.9
        results.append(f"A={A}: slope={fit.slope:.4f} (<= {bound:.2f}) r2={fit.r_squared:.4f}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 120.0
    _report(2, ok, "; ".join(results) + f"; {elapsed:.1f}s")


def test_criterion_03_transform_rate_and_head_to_head():
    t0 = time.perf_counter()
    grid = [2**k for k in range(8, 17)]
    parts = []
    ok = True
    for A in A_GRID:
        f = prototype(A)
        fit = fit_rate(run_sweep("transform-halton", f, grid))
        bound = -(1.0 - A) + 0.10
        ok = ok and fit.slope <= bound
        mu = oracle_integral(f)
        err_strip = abs(estimate_strip(f, 2**14).value - mu)
        err_tf = abs(estimate_transform(f, 2**14).value - mu)
        ok = ok and err_tf < err_strip
        parts.append(
            f"A={A}: slope={fit.slope:.4f} (<= {bound:.2f}), "
            f"2^15-budget errors transform {err_tf:.2e} < strip {err_strip:.2e}"
        )
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 120.0
    _report(3, ok, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_criterion_04_truncation_inequality():
    ok = True
    for A in A_GRID:
        f = prototype(A)
        for eps in (1e-1, 1e-2, 1e-3):
            mass = oracle_strip_integral(f, eps)
            ok = ok and mass <= truncation_bound(1.0, A, eps)
    ratio = oracle_strip_integral(prototype(0.5), 1e-3) / truncation_bound(
        1.0, 0.5, 1e-3
    )
    ok = ok and abs(ratio - 1.0) <= 0.10
    _report(
        4,
        ok,
        f"band mass under the bound on all 9 cases; tightness ratio {ratio:.5f} at "
        "A=0.5, eps=1e-3",
    )


def test_criterion_05_variation_group_scaling():
    f = prototype(0.5)
    hi = variation_terms(f, 1e-1).group_totals()
    lo = variation_terms(f, 1e-2).group_totals()
    ratio = lo[2] / hi[2]
    target = 10.0 ** (0.5 + 1.0)
    ok = abs(ratio / target - 1.0) <= 0.25
    _report(
        5,
        ok,
        f"steepest variation group grew {ratio:.3f}x for a 10x band cut "
        f"(target {target:.2f} +- 25%)",
    )


def test_criterion_06_extension_cannot_beat_the_strip():
    f = prototype(0.5)
    strip_fit = fit_rate(run_sweep("strip", f, [4**k for k in range(4, 9)]))
    ext_fit = fit_rate(run_sweep("extension", f, [2**k for k in range(9, 18)]))
    ok = ext_fit.slope >= strip_fit.slope - 0.10
    _report(
        6,
        ok,
        f"extension slope {ext_fit.slope:.4f} vs strip slope {strip_fit.slope:.4f} "
        "(must not win by more than 0.10)",
    )


def test_criterion_07_gap_rate():
    scaled = [extension_gap(0.5, eps) / eps**0.5 for eps in (1e-1, 1e-2, 1e-3)]
    spread = max(scaled) / min(scaled)
    ok = spread <= 1.25
    _report(
        7,
        ok,
        f"gap/eps^0.5 = {', '.join(f'{v:.4f}' for v in scaled)}; spread {spread:.4f}",
    )


def test_criterion_08_pullback_envelopes_are_stable():
    ok = True
    consts = []
    for h_id in ("one", "poly", "trig"):
        f = modulated(0.5, h_id)
        rep = def2_check(transformed(f), A1=f.A, A2=f.A / 2, grid_sizes=(32, 64, 128))
        ok = ok and rep.passed
        consts.append(f"{h_id}: g11 const {rep.constants['g11']:.4f}")
    _report(8, ok, "all three modulators scale-free across 32..128 grids; " + "; ".join(consts))


def test_criterion_09_exhaustive_stratification():
    ok = True
    for depth in range(1, 7):
        n = 4**depth
        cells = cell_indices(REFERENCE, tvdc_points(REFERENCE, n), depth)
        ok = ok and len(set(cells.tolist())) == n
    _report(9, ok, "first 4^K points occupy all 4^K level-K cells for K = 1..6")


def _smooth_triangle_records(fn, exact):
    records = []
    for k in range(4, 9):
        n = 4**k
        pts = tvdc_points(REFERENCE, n)
        est = REFERENCE.area * float(np.mean(fn(pts[:, 0], pts[:, 1])))
        records.append(
            SweepRecord("tvdc", "smooth", 0.5, n, 0.0, est, abs(est - exact), 1, None)
        )
    return records


def test_criterion_10_smooth_benchmark_error_bound():
    records = _smooth_triangle_records(lambda x1, x2: x1 + x2, 1.0 / 3.0)
    n = records[-1].n_total
    bound = 50.0 * math.log(n) / n
    err = records[-1].abs_error
    ok = err <= bound
    _report(10, ok, f"affine integrand at n=4^8: error {err:.2e} <= 50 ln(n)/n = {bound:.2e}")


@pytest.mark.xfail(
    strict=False,
    reason=(
        "the equal-weight centroid rule integrates affine functions exactly, "
        "so these errors sit at rounding level and carry no fittable decay"
    ),
)
def test_criterion_10_smooth_benchmark_slope():
    records = _smooth_triangle_records(lambda x1, x2: x1 + x2, 1.0 / 3.0)
    try:
        fit = fit_rate(records)
    except DegenerateFitError as e:
        print(f"criterion 10 FAIL (slope clause): {e}")
        pytest.fail(f"no decaying error to fit: {e}")
    ok = fit.slope <= -0.85
    _report(10, ok, f"affine-benchmark slope {fit.slope:.4f} <= -0.85")


def test_criterion_10_supplementary_curved_benchmark():
    # a genuinely curved smooth integrand shows the decay the affine one
    # cannot: exp(x1 + 2 x2) over the reference triangle
    exact = math.e**2 - math.e - math.e**2 / 2.0 + 0.5
    records = _smooth_triangle_records(
        lambda x1, x2: np.exp(x1 + 2.0 * x2), exact
    )
    fit = fit_rate(records)
    ok = fit.slope <= -0.85
    _report(10, ok, f"curved-benchmark slope {fit.slope:.4f} <= -0.85 (r2 {fit.r_squared:.4f})")


def test_criterion_11_rqmc_replicates_center_on_the_integral():
    f = prototype(0.3)
    mu = oracle_integral(f)
    est = estimate_transform(f, 2**12, mode="rqmc", replicates=32, seed=20260816)
    limit = 3.0 * est.replicate_sd / math.sqrt(32)
    diff = abs(est.value - mu)
    ok = diff <= limit
    _report(11, ok, f"|replicate mean - mu| = {diff:.2e} <= 3 sd/sqrt(R) = {limit:.2e}")


_DETERMINISTIC_COMMANDS = [
    ("points-halton", ["points", "--generator", "halton", "--n", "128"]),
    ("points-tvdc", ["points", "--generator", "tvdc", "--n", "64"]),
    (
        "points-tvdc-upper",
        ["points", "--generator", "tvdc", "--n", "64", "--triangle", "upper",
         "--epsilon", "0.1"],
    ),
    ("points-uniform", ["points", "--generator", "uniform", "--n", "64", "--seed", "9"]),
    ("integrate-strip", ["integrate", "--method", "strip", "--n", "256"]),
    (
        "integrate-rqmc",
        ["integrate", "--method", "transform", "--mode", "rqmc", "--n", "128",
         "--seed", "3", "--replicates", "4"],
    ),
    ("sweep-strip", ["sweep", "--method", "strip", "--n-grid", "64,128,256"]),
    ("sweep-extension", ["sweep", "--method", "extension", "--n-grid", "64,128,256"]),
    (
        "sweep-halton",
        ["sweep", "--method", "transform", "--mode", "halton",
         "--n-grid", "64,128,256"],
    ),
    (
        "sweep-rqmc",
        ["sweep", "--method", "transform", "--mode", "rqmc", "--seed", "5",
         "--replicates", "2", "--n-grid", "64,128,256"],
    ),
    (
        "sweep-mc",
        ["sweep", "--method", "mc", "--seed", "5", "--replicates", "2",
         "--n-grid", "64,128,256"],
    ),
    ("sweep-synthetic", ["sweep", "--synthetic-slope", "-1", "--n-grid", "2^4..2^8"]),
    ("verify-truncation", ["verify", "--suite", "truncation"]),
]


def test_criterion_12_reruns_are_byte_identical(tmp_path):
    stale = []
    for name, argv in _DETERMINISTIC_COMMANDS:
        blobs = []
        for attempt in ("a", "b"):
            out = tmp_path / f"{name}-{attempt}"
            code = main(argv + ["--out", str(out)])
            assert code == EXIT_OK, f"{name} exited {code}"
            blobs.append(out.read_bytes())
        if blobs[0] != blobs[1]:
            stale.append(name)
    _report(
        12,
        not stale,
        f"{len(_DETERMINISTIC_COMMANDS)} deterministic commands rerun byte-identical"
        + (f"; mismatches: {stale}" if stale else ""),
    )
