"""Oracles, sweeps, rate fits, and the scaling diagnostics.

The quadrature oracles get checked against hand-derived closed forms before
anything else leans on them; every frozen constant below traces back to one
of those forms.
"""

import numpy as np
import pytest

from diagqmc.analysis import (
    METHODS,
    SWEEP_FIELDS,
    DegenerateFitError,
    OracleConvergenceError,
    SweepRecord,
    _dyadic_edges,
    _refine,
    extension_gap,
    fit_rate,
    oracle_integral,
    oracle_strip_integral,
    oracle_triangle_integral,
    rate_fit_dict,
    run_sweep,
    sweep_csv,
    synthetic_records,
    variation_terms,
)
from diagqmc.integrands import constant, diag_ripple, modulated, prototype
from diagqmc.quad import epsilon_schedule, estimate_strip


def _power_mu(A):
    return 2.0 / ((1.0 - A) * (2.0 - A))


def _band_mass(A, eps):
    # integral of |x1-x2|^(-A) over the band of half-width eps, done by hand:
    # cross-lines at distance s have length 2(1-s)
    return 2.0 * (eps ** (1 - A) / (1 - A) - eps ** (2 - A) / (2 - A))


# -- oracle engine ---------------------------------------------------------------


def test_oracle_closed_form_and_quadrature_agree():
    for A in (0.25, 0.5, 0.75):
        f = prototype(A)
        assert oracle_integral(f, path="closed_form") == pytest.approx(
            _power_mu(A), abs=1e-12
        )
        assert oracle_integral(f, path="quadrature") == pytest.approx(
            _power_mu(A), abs=1e-8
        )


def test_oracle_poly_modulator_self_consistency():
    f = modulated(0.5, "poly")
    cf = oracle_integral(f, path="closed_form")
    qd = oracle_integral(f, path="quadrature")
    assert cf == pytest.approx(qd, abs=1e-8)


def test_oracle_trig_modulator_is_quadrature_only():
    f = modulated(0.5, "trig")
    with pytest.raises(ValueError):
        oracle_integral(f, path="closed_form")
    loose = oracle_integral(f, tol=1e-8)
    tight = oracle_integral(f, tol=1e-12)
    assert loose == pytest.approx(tight, abs=1e-8)


def test_oracle_rejects_what_it_cannot_integrate():
    with pytest.raises(ValueError):
        oracle_integral(diag_ripple(0.5))
    with pytest.raises(ValueError):
        oracle_integral(prototype(0.5), path="magic")


def test_strip_oracle_matches_the_hand_integral():
    for A in (0.3, 0.5, 0.7):
        for eps in (0.1, 0.01):
            got = oracle_strip_integral(prototype(A), eps)
            assert got == pytest.approx(_band_mass(A, eps), abs=1e-10)
    assert oracle_strip_integral(prototype(0.5), 0.01) == pytest.approx(
        0.398667, abs=1e-6
    )
    assert oracle_strip_integral(prototype(0.5), 0.0) == 0.0
    with pytest.raises(ValueError):
        oracle_strip_integral(prototype(0.5), 1.5)


def test_triangle_oracles_add_up():
    f = modulated(0.5, "trig")  # not symmetric under swapping the coordinates
    eps = 0.1
    up = oracle_triangle_integral(f, eps, "upper")
    lo = oracle_triangle_integral(f, eps, "lower")
    assert up != pytest.approx(lo, rel=1e-3)
    band = oracle_strip_integral(f, eps)
    whole = oracle_integral(f, path="quadrature")
    assert up + lo + band == pytest.approx(whole, abs=1e-8)
    full_up = oracle_triangle_integral(f, 0.0, "upper")
    full_lo = oracle_triangle_integral(f, 0.0, "lower")
    assert full_up + full_lo == pytest.approx(whole, abs=1e-8)
    with pytest.raises(ValueError):
        oracle_triangle_integral(f, eps, "middle")


def test_refine_reports_a_stuck_integral():
    with pytest.raises(OracleConvergenceError):
        _refine(lambda v: 1.0 / v, _dyadic_edges(), 1e-10, "harmonic", max_nodes=64)


# -- rate fits -------------------------------------------------------------------


def test_fit_rate_recovers_synthetic_slopes():
    grid = [2**k for k in range(4, 10)]
    fit = fit_rate(synthetic_records(-0.5, grid))
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.n_min == 16 and fit.n_max == 512
    scaled = fit_rate(synthetic_records(-0.5, grid, coeff=10.0))
    assert scaled.slope == pytest.approx(-0.5, abs=1e-12)
    assert scaled.intercept == pytest.approx(np.log(10.0), abs=1e-12)


def test_fit_rate_rejects_degenerate_input():
    grid = [16, 32, 64]
    recs = synthetic_records(-0.5, grid)
    with pytest.raises(ValueError):
        fit_rate(recs[:2])
    zero = [
        SweepRecord("m", "f", 0.5, n, 0.0, 0.0, 0.0, 1, None) for n in grid
    ]
    with pytest.raises(DegenerateFitError):
        fit_rate(zero)
    bad = [
        SweepRecord("m", "f", 0.5, n, 0.0, 0.0, float("nan"), 1, None) for n in grid
    ]
    with pytest.raises(DegenerateFitError):
        fit_rate(bad)


def test_rate_fit_dict_round_trip():
    fit = fit_rate(synthetic_records(-1.0, [8, 16, 32]))
    d = rate_fit_dict(fit)
    assert list(d) == ["slope", "intercept", "r_squared", "n_min", "n_max"]
    assert d["slope"] == fit.slope


# -- sweeps ----------------------------------------------------------------------


def test_run_sweep_strip_rows():
    f = prototype(0.5)
    grid = [4**4, 4**5, 4**6]
    records = run_sweep("strip", f, grid)
    assert [r.n_total for r in records] == [2 * n for n in grid]
    mu = _power_mu(0.5)
    for n, rec in zip(grid, records):
        assert rec.epsilon == epsilon_schedule(2 * n)
        est = estimate_strip(f, n)
        assert rec.estimate == est.value
        assert rec.abs_error == pytest.approx(abs(est.value - mu), abs=1e-15)
        assert rec.replicates == 1 and rec.stderr is None
    errs = [r.abs_error for r in records]
    assert errs[0] > errs[1] > errs[2]


def test_run_sweep_extension_records_its_band():
    records = run_sweep("extension", prototype(0.5), [256, 512, 1024])
    for rec in records:
        assert rec.n_total in (256, 512, 1024)
        assert rec.epsilon == epsilon_schedule(rec.n_total)


def test_run_sweep_transform_rows_use_total_counts():
    records = run_sweep("transform-halton", prototype(0.5), [64, 128])
    assert [r.n_total for r in records] == [128, 256]
    assert all(r.epsilon == 0.0 for r in records)


def test_run_sweep_randomized_rows():
    records = run_sweep("mc", prototype(0.5), [128, 256, 512], replicates=4, seed=3)
    for rec in records:
        assert rec.replicates == 4
        assert rec.stderr > 0.0
        # averaging |error| over replicates can only exceed the error of the mean
        assert rec.abs_error >= abs(rec.estimate - _power_mu(0.5)) - 1e-15
    again = run_sweep("mc", prototype(0.5), [128, 256, 512], replicates=4, seed=3)
    assert [r.estimate for r in again] == [r.estimate for r in records]


def test_run_sweep_rqmc_rows():
    records = run_sweep(
        "transform-rqmc", prototype(0.5), [128, 256], replicates=3, seed=17
    )
    assert [r.n_total for r in records] == [256, 512]
    assert all(r.replicates == 3 and r.stderr > 0.0 for r in records)


def test_run_sweep_validation():
    f = prototype(0.5)
    with pytest.raises(ValueError):
        run_sweep("simpson", f, [16, 32])
    with pytest.raises(ValueError):
        run_sweep("strip", f, [])
    with pytest.raises(ValueError):
        run_sweep("strip", f, [64, 32])
    with pytest.raises(ValueError):
        run_sweep("mc", f, [16, 32])  # no seed
    with pytest.raises(ValueError):
        run_sweep("transform-rqmc", f, [16, 32], replicates=1, seed=1)
    with pytest.raises(ValueError):
        run_sweep("strip", f, [16, 32], replicates=0)
    assert set(METHODS) >= {"strip", "extension", "transform-halton", "mc"}


def test_sweep_csv_golden():
    text = sweep_csv(synthetic_records(-1.0, [4, 16]))
    want = (
        "method,integrand,A,n_total,epsilon,estimate,abs_error,replicates,stderr\n"
        "synthetic,synthetic,0.5,4,0,0,0.25,1,\n"
        "synthetic,synthetic,0.5,16,0,0,0.0625,1,\n"
    )
    assert text == want
    assert text.splitlines()[0] == ",".join(SWEEP_FIELDS)


# -- scaling diagnostics ---------------------------------------------------------


def test_variation_terms_structure_and_values():
    rep = variation_terms(prototype(0.5), 0.1)
    assert set(rep.order_1) == {
        "corner_f_at_0_1",
        "edge_abs_f_x1_0",
        "edge_abs_f_x2_1",
        "interior_abs_f",
    }
    assert set(rep.order_eps_A) == {
        "corner_f_at_0_eps",
        "corner_f_at_1meps_1",
        "hyp_abs_f",
        "edge_abs_f01_x1_0",
        "edge_abs_f10_x2_1",
    }
    assert set(rep.order_eps_A1) == {"hyp_abs_grad", "interior_abs_hess"}
    # the band-edge line integral of |f| is (1-eps) eps^(-A) exactly
    assert rep.order_eps_A["hyp_abs_f"] == pytest.approx(0.9 * 0.1**-0.5, rel=1e-6)
    assert rep.order_eps_A["corner_f_at_0_eps"] == pytest.approx(0.1**-0.5, rel=1e-12)
    totals = rep.group_totals()
    assert totals == (
        pytest.approx(4.45705, rel=1e-4),
        pytest.approx(13.49516, rel=1e-4),
        pytest.approx(64.66441, rel=1e-4),
    )


def test_variation_dominant_group_scales_hardest():
    hi = variation_terms(prototype(0.5), 0.1).group_totals()
    lo = variation_terms(prototype(0.5), 0.01).group_totals()
    growth = [l / h for h, l in zip(hi, lo)]
    assert growth[0] < growth[1] < growth[2]
    assert growth[2] == pytest.approx(37.857, rel=1e-3)


def test_variation_requires_partials():
    with pytest.raises(ValueError):
        variation_terms(diag_ripple(0.5), 0.1)
    with pytest.raises(ValueError):
        variation_terms(prototype(0.5), 0.0)


def test_extension_gap_against_the_hand_formula():
    # at A = 1/2 the two-profile L1 distance integrates in closed form to
    # (3/(1-A) - 1 + A/2 - A(A+1)/6) eps^(1/2) - c eps^(3/2); freezing the
    # leading coefficient 5.125 pins the geometry of both continuations
    for eps in (0.1, 0.01, 0.001):
        got = extension_gap(0.5, eps)
        want = 5.125 * eps**0.5 - 1.5520833333 * eps**1.5
        assert got == pytest.approx(want, rel=1e-6)
        assert got >= _band_mass(0.5, eps)


def test_extension_gap_scaled_values():
    scaled = [extension_gap(0.5, e) / e**0.5 for e in (0.1, 0.01, 0.001)]
    assert scaled[0] == pytest.approx(4.969792, abs=1e-5)
    assert scaled[1] == pytest.approx(5.109479, abs=1e-5)
    assert scaled[2] == pytest.approx(5.123448, abs=1e-5)


def test_constant_integrand_oracle_paths():
    c = constant(2.0)
    assert oracle_integral(c) == 2.0
    with pytest.raises(ValueError):
        oracle_integral(c, path="quadrature")
