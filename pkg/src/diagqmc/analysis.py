"""Reference values, convergence sweeps, rate fits, and scaling diagnostics.

Oracle integrals use the change of variables s = v^(1/(1-A)) in the
diagonal-distance coordinate, which turns the line density s^(-A) ds into a
constant multiple of dv and leaves a bounded integrand. The v-integral is done
on dyadic panels with Gauss-Legendre nodes, doubling the node count until two
successive refinements agree; smooth cross-line averages use a fixed interior
rule far more accurate than the outer one for the built-in modulators.

Sweeps record one row per grid point with total evaluation counts, so methods
that spend two evaluations per nominal point (strip, transform) are compared
fairly against single-set methods (extension, mc).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from diagqmc.integrands import DiagonalSingularIntegrand, extension_pair
from diagqmc.lowdisc import cranley_patterson_shift, halton_points
from diagqmc.quad import (
    _transform_value,
    epsilon_schedule,
    estimate_extension,
    estimate_mc,
    estimate_strip,
    estimate_transform,
)


class OracleConvergenceError(RuntimeError):
    """Panel quadrature failed to stabilize within the refinement budget."""


class DegenerateFitError(ValueError):
    """Rate fit rejected: an abs_error of zero has no logarithm."""


@dataclass(frozen=True)
class SweepRecord:
    method: str
    integrand: str
    A: float
    n_total: int
    epsilon: float
    estimate: float
    abs_error: float
    replicates: int
    stderr: float | None = None


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_min: int
    n_max: int


SWEEP_FIELDS = (
    "method",
    "integrand",
    "A",
    "n_total",
    "epsilon",
    "estimate",
    "abs_error",
    "replicates",
    "stderr",
)

METHODS = (
    "strip",
    "extension",
    "transform-halton",
    "transform-rqmc",
    "transform-mc",
    "mc",
)


# -- panel quadrature engine --------------------------------------------------


@lru_cache(maxsize=32)
def _unit_rule(nodes: int):
    """Gauss-Legendre nodes/weights mapped to [0,1]; weights sum to 1."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return (x + 1.0) / 2.0, w / 2.0


def _panel_sum(fn, edges: np.ndarray, nodes: int) -> float:
    tn, tw = _unit_rule(nodes)
    lo = edges[:-1]
    width = np.diff(edges)
    pts = (lo[:, None] + width[:, None] * tn[None, :]).ravel()
    wts = (width[:, None] * tw[None, :]).ravel()
    return float(wts @ fn(pts))


def _refine(fn, edges, tol: float, label: str, max_nodes: int = 1024) -> float:
    """Double the per-panel node count until successive totals agree.

    Agreement is |delta| <= tol * max(1, |total|): absolute for small values,
    relative once the integral exceeds 1.
    """
    edges = np.asarray(edges, dtype=np.float64)
    prev = None
    delta = math.inf
    nodes = 16
    while nodes <= max_nodes:
        cur = _panel_sum(fn, edges, nodes)
        if prev is not None:
            delta = abs(cur - prev)
            if delta <= tol * max(1.0, abs(cur)):
                return cur
        prev = cur
        nodes *= 2
    raise OracleConvergenceError(
        f"{label}: refinement still moving by {delta:.3e} at {max_nodes} nodes "
        f"per panel ({len(edges) - 1} panels, tol {tol:g})"
    )


def _dyadic_edges(k_min: int = -40) -> list[float]:
    return [0.0] + [2.0**k for k in range(k_min, 1)]


def _geometric_edges(lo: float, hi: float = 1.0) -> list[float]:
    if not 0.0 < lo < hi:
        raise ValueError(f"need 0 < lo < hi, got {lo}, {hi}")
    edges = [lo]
    while edges[-1] * 2.0 < hi:
        edges.append(edges[-1] * 2.0)
    edges.append(hi)
    return edges


# -- oracles -------------------------------------------------------------------

_LINE_NODES = 64  # inner cross-line rule; overkill for the built-in modulators


def _line_averages(h_fn, s: np.ndarray) -> np.ndarray:
    """Average of h over the two lines |x2 - x1| = s, times 2 (both halves)."""
    tn, tw = _unit_rule(_LINE_NODES)
    base = tn[:, None] * (1.0 - s[None, :])
    upper = tw @ h_fn(base, base + s[None, :])
    lower = tw @ h_fn(base + s[None, :], base)
    return upper + lower


def _line_average_half(h_fn, s: np.ndarray, half: str) -> np.ndarray:
    tn, tw = _unit_rule(_LINE_NODES)
    base = tn[:, None] * (1.0 - s[None, :])
    if half == "upper":
        return tw @ h_fn(base, base + s[None, :])
    if half == "lower":
        return tw @ h_fn(base + s[None, :], base)
    raise ValueError(f"half must be 'upper' or 'lower', got {half!r}")


def _require_modulator(f: DiagonalSingularIntegrand, what: str):
    if f.modulator is None:
        raise ValueError(
            f"{what} needs the product form |x1-x2|^(-A) h(x); "
            f"{f.name} does not provide a modulator"
        )
    return f.modulator.fn


def oracle_integral(
    f: DiagonalSingularIntegrand, tol: float = 1e-10, path: str = "auto"
) -> float:
    """Reference value of the integral of f over the square.

    path 'closed_form' returns the stored exact value, 'quadrature' forces the
    substitution-based panel quadrature, 'auto' prefers the closed form.
    """
    if path not in ("auto", "closed_form", "quadrature"):
        raise ValueError(f"unknown oracle path {path!r}")
    if path in ("auto", "closed_form") and f.exact_integral is not None:
        return f.exact_integral
    if path == "closed_form":
        raise ValueError(f"{f.name} has no closed-form integral")
    h_fn = _require_modulator(f, "quadrature oracle")
    p = 1.0 / (1.0 - f.A)

    def fn(v):
        s = v**p
        return (1.0 - s) * _line_averages(h_fn, s)

    return p * _refine(fn, _dyadic_edges(), tol, f"oracle_integral[{f.name}]")


def oracle_strip_integral(
    f: DiagonalSingularIntegrand, epsilon: float, tol: float = 1e-10
) -> float:
    """Integral of f over the band |x1 - x2| < epsilon."""
    if epsilon == 0.0:
        return 0.0
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    h_fn = _require_modulator(f, "strip oracle")
    A = f.A
    p = 1.0 / (1.0 - A)

    def fn(v):
        s = epsilon * v**p
        return (1.0 - s) * _line_averages(h_fn, s)

    scale = p * epsilon ** (1.0 - A)
    return scale * _refine(fn, _dyadic_edges(), tol, f"oracle_strip[{f.name}]")


def oracle_triangle_integral(
    f: DiagonalSingularIntegrand, epsilon: float, half: str, tol: float = 1e-10
) -> float:
    """Integral of f over one triangle at distance >= epsilon from the diagonal."""
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    h_fn = _require_modulator(f, "triangle oracle")
    A = f.A
    p = 1.0 / (1.0 - A)

    def whole(v):
        s = v**p
        return (1.0 - s) * _line_average_half(h_fn, s, half)

    def band(v):
        s = epsilon * v**p
        return (1.0 - s) * _line_average_half(h_fn, s, half)

    label = f"oracle_triangle[{f.name},{half}]"
    total = p * _refine(whole, _dyadic_edges(), tol, label)
    if epsilon == 0.0:
        return total
    cut = p * epsilon ** (1.0 - A) * _refine(band, _dyadic_edges(), tol, label + ":band")
    return total - cut


# -- sweeps and rate fits ------------------------------------------------------


def _sub_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([seed, *path]).generate_state(1, np.uint64)[0])


def run_sweep(
    method: str,
    f: DiagonalSingularIntegrand,
    n_grid,
    c: float = 1.0,
    replicates: int = 1,
    seed: int | None = None,
    oracle_tol: float = 1e-10,
) -> list[SweepRecord]:
    """One SweepRecord per n in ascending n_grid.

    n counts points per component, so n_total is 2n for strip and transform
    rows. Randomized methods run ``replicates`` independent estimates per n
    (sub-seeded from seed, the n value, and the replicate index) and report
    the mean estimate, the mean absolute error, and the standard error of the
    replicate mean. epsilon records the band width the method actually used:
    the schedule value for strip and extension, 0 for the others.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, have {METHODS}")
    n_grid = [int(n) for n in n_grid]
    if not n_grid:
        raise ValueError("n_grid is empty")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be strictly ascending")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    randomized = method in ("transform-rqmc", "transform-mc", "mc")
    if randomized and seed is None:
        raise ValueError(f"method {method} requires a seed")
    if method == "transform-rqmc" and replicates < 2:
        raise ValueError("transform-rqmc needs replicates >= 2")

    mu = oracle_integral(f, tol=oracle_tol)
    records = []
    for n in n_grid:
        try:
            records.append(_sweep_one(method, f, n, c, replicates, seed, mu))
        except Exception as e:
            if hasattr(e, "add_note"):
                e.add_note(f"run_sweep: failed at n = {n}")
            raise
    return records


def _sweep_one(method, f, n, c, replicates, seed, mu) -> SweepRecord:
    base = dict(method=method, integrand=f.name, A=f.A)
    if method == "strip":
        est = estimate_strip(f, n, c)
        return SweepRecord(
            **base,
            n_total=2 * n,
            epsilon=est.epsilon,
            estimate=est.value,
            abs_error=abs(est.value - mu),
            replicates=1,
            stderr=None,
        )
    if method == "extension":
        eps = epsilon_schedule(n, c)
        est = estimate_extension(f, n, eps)
        return SweepRecord(
            **base,
            n_total=n,
            epsilon=eps,
            estimate=est.value,
            abs_error=abs(est.value - mu),
            replicates=1,
            stderr=None,
        )
    if method == "transform-halton":
        est = estimate_transform(f, n, mode="halton")
        return SweepRecord(
            **base,
            n_total=2 * n,
            epsilon=0.0,
            estimate=est.value,
            abs_error=abs(est.value - mu),
            replicates=1,
            stderr=None,
        )

    # randomized modes: replicate manually so abs_error averages per-replicate
    vals = np.empty(replicates)
    if method == "transform-rqmc":
        pts = halton_points(n)
        for r in range(replicates):
            rng = np.random.default_rng(np.random.SeedSequence([seed, n, r]))
            vals[r] = _transform_value(f, cranley_patterson_shift(pts, rng.random(2)))
        n_total = 2 * n
    elif method == "transform-mc":
        for r in range(replicates):
            vals[r] = estimate_transform(
                f, n, mode="mc", seed=_sub_seed(seed, n, r)
            ).value
        n_total = 2 * n
    else:  # mc
        for r in range(replicates):
            vals[r] = estimate_mc(f, n, seed=_sub_seed(seed, n, r)).value
        n_total = n
    stderr = (
        float(np.std(vals, ddof=1) / math.sqrt(replicates)) if replicates > 1 else None
    )
    return SweepRecord(
        **base,
        n_total=n_total,
        epsilon=0.0,
        estimate=float(np.mean(vals)),
        abs_error=float(np.mean(np.abs(vals - mu))),
        replicates=replicates,
        stderr=stderr,
    )


def fit_rate(records) -> RateFit:
    """Least-squares line through (ln n_total, ln abs_error)."""
    if len(records) < 3:
        raise ValueError(f"need at least 3 records to fit a rate, got {len(records)}")
    recs = sorted(records, key=lambda r: r.n_total)
    errs = np.array([r.abs_error for r in recs], dtype=np.float64)
    if np.any(errs == 0.0):
        raise DegenerateFitError(
            "abs_error is exactly 0 for some record; perturb the n grid"
        )
    if not np.all(np.isfinite(errs)) or np.any(errs < 0.0):
        raise DegenerateFitError("abs_error values must be finite and positive")
    x = np.log([r.n_total for r in recs])
    y = np.log(errs)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sstot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if sstot == 0.0 else 1.0 - float(np.sum(resid**2)) / sstot
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=min(max(r2, 0.0), 1.0),
        n_min=recs[0].n_total,
        n_max=recs[-1].n_total,
    )


def synthetic_records(slope: float, n_grid, coeff: float = 1.0) -> list[SweepRecord]:
    """Records with abs_error = coeff * n^slope, for exercising the fit path."""
    return [
        SweepRecord(
            method="synthetic",
            integrand="synthetic",
            A=0.5,
            n_total=int(n),
            epsilon=0.0,
            estimate=0.0,
            abs_error=coeff * float(n) ** slope,
            replicates=1,
            stderr=None,
        )
        for n in n_grid
    ]


# -- variation-term diagnostic -------------------------------------------------


@dataclass(frozen=True)
class VariationReport:
    """Named boundary/edge/interior integrals over the upper triangle.

    Grouped by their expected growth as the band shrinks: order_1 terms stay
    bounded, order_eps_A terms grow like eps^(-A), order_eps_A1 like
    eps^(-A-1). The last group dominates the total variation.
    """

    epsilon: float
    order_1: dict
    order_eps_A: dict
    order_eps_A1: dict

    def group_totals(self) -> tuple[float, float, float]:
        return (
            sum(self.order_1.values()),
            sum(self.order_eps_A.values()),
            sum(self.order_eps_A1.values()),
        )


def variation_terms(
    f: DiagonalSingularIntegrand, epsilon: float, tol: float = 1e-6
) -> VariationReport:
    """Evaluate each variation term of f over {x2 >= x1 + epsilon}.

    Needs analytic partials. Values are reported unsigned; only their scaling
    in epsilon is meaningful, since the variation bound has unknown constants.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if f.partials is None:
        raise ValueError(f"{f.name} has no analytic partials")
    fx = f.fn
    f10, f01 = f.partials["f10"], f.partials["f01"]
    f20, f02, f11 = f.partials["f20"], f.partials["f02"], f.partials["f11"]
    eps = epsilon
    geo = _geometric_edges(eps)
    flat = [0.0, 1.0 - eps]
    tn, tw = _unit_rule(128)

    def edge(val_fn, label):
        # integral over s in [eps, 1] of |val| with the edge parametrized by s
        return _refine(lambda s: np.abs(val_fn(s)), geo, tol, label)

    def hyp(val_fn, label):
        # along x2 = x1 + eps, x1 from 0 to 1-eps
        return _refine(lambda x1: np.abs(val_fn(x1, x1 + eps)), flat, tol, label)

    def interior(val_fn, label):
        # cross-line average (length 1-s) of |val|, then s from eps to 1
        def fn(s):
            x1 = tn[:, None] * (1.0 - s[None, :])
            return (tw @ np.abs(val_fn(x1, x1 + s[None, :]))) * (1.0 - s)

        return _refine(fn, geo, tol, label)

    def at(x1, x2):
        out = fx(np.full(1, float(x1)), np.full(1, float(x2)))
        return float(np.abs(out[0]))

    order_1 = {
        "corner_f_at_0_1": at(0.0, 1.0),
        "edge_abs_f_x1_0": edge(lambda s: fx(np.zeros_like(s), s), "edge |f|(0,x2)"),
        "edge_abs_f_x2_1": edge(lambda s: fx(1.0 - s, np.ones_like(s)), "edge |f|(x1,1)"),
        "interior_abs_f": interior(fx, "interior |f|"),
    }
    order_eps_A = {
        "corner_f_at_0_eps": at(0.0, eps),
        "corner_f_at_1meps_1": at(1.0 - eps, 1.0),
        "hyp_abs_f": hyp(fx, "hypotenuse |f|"),
        "edge_abs_f01_x1_0": edge(
            lambda s: f01(np.zeros_like(s), s), "edge |f01|(0,x2)"
        ),
        "edge_abs_f10_x2_1": edge(
            lambda s: f10(1.0 - s, np.ones_like(s)), "edge |f10|(x1,1)"
        ),
    }
    order_eps_A1 = {
        "hyp_abs_grad": hyp(
            lambda x1, x2: np.abs(f10(x1, x2)) + np.abs(f01(x1, x2)),
            "hypotenuse |f10|+|f01|",
        ),
        "interior_abs_hess": interior(
            lambda x1, x2: np.abs(f20(x1, x2)) + np.abs(f02(x1, x2)) + np.abs(f11(x1, x2)),
            "interior |f20|+|f02|+|f11|",
        ),
    }
    return VariationReport(
        epsilon=eps, order_1=order_1, order_eps_A=order_eps_A, order_eps_A1=order_eps_A1
    )


# -- extension gap ---------------------------------------------------------------


def extension_gap(A: float, epsilon: float, tol: float = 1e-8) -> float:
    """Integral of |f1 - f2| over the band |x1 - x2| < epsilon.

    f1 and f2 are the two continuations from extension_pair; they agree
    outside the band, so this is the whole of their L1 distance. Cross-lines
    at signed distance s have length 1 - |s|; the profile difference depends
    on s alone, so the band integral reduces to one dimension, with the same
    substitution as the oracles absorbing the s^(-A) blowup.
    """
    f1, f2 = extension_pair(A, epsilon)
    p = 1.0 / (1.0 - A)

    def fn(v):
        # anchor at the corner so x2 - x1 = +-s holds exactly even for tiny s
        s = epsilon * v**p
        zero = np.zeros_like(s)
        d_up = np.abs(f1.fn(zero, s) - f2.fn(zero, s))  # x2 - x1 = +s
        d_dn = np.abs(f1.fn(s, zero) - f2.fn(s, zero))  # x2 - x1 = -s
        return (1.0 - s) * s**A * (d_up + d_dn)

    scale = p * epsilon ** (1.0 - A)
    return scale * _refine(fn, _dyadic_edges(), tol, f"extension_gap[A={A:g}]")


# -- serialization ---------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def sweep_csv(records) -> str:
    """Render sweep records as CSV, full double precision, stable field order."""
    buf = io.StringIO()
    buf.write(",".join(SWEEP_FIELDS) + "\n")
    for r in records:
        buf.write(",".join(_fmt(getattr(r, name)) for name in SWEEP_FIELDS) + "\n")
    return buf.getvalue()


def rate_fit_dict(fit: RateFit) -> dict:
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "n_min": fit.n_min,
        "n_max": fit.n_max,
    }
