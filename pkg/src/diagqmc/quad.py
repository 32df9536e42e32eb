"""Estimators for integrals over the square with a diagonal singularity.

Four routes:

* strip: drop a band of half-width epsilon around the diagonal, integrate
  over the two remaining triangles with triangular van der Corput points.
  The discarded mass shrinks like epsilon^(1-A) while the point-set error
  grows like epsilon^(-A-1) per unit discrepancy; epsilon_schedule balances
  the two at sqrt(log n / n).
* extension: replace the singular profile inside the band by an even
  quadratic bridge, then integrate the bounded extension over the whole
  square. The band bias has the same epsilon^(1-A) size as the strip
  truncation, so this route cannot beat the strip rate.
* transform: pull each triangle back to the square through the square-root
  map, turning the diagonal singularity into corner/edge power laws that
  Halton points handle at nearly first order.
* mc: plain Monte Carlo on the square, the baseline.

Budget note: parameter n counts points per component, so strip and transform
estimates cost 2n integrand evaluations; comparisons across methods should
use totals (see analysis.run_sweep).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from diagqmc.integrands import (
    DiagonalSingularIntegrand,
    UnsupportedIntegrandError,
    transformed,
)
from diagqmc.lowdisc import (
    SequenceSpec,
    cranley_patterson_shift,
    halton_points,
    uniform_points,
)
from diagqmc.trianglepts import REFERENCE, Triangle, map_points, tvdc_points

_TINY = np.nextafter(0.0, 1.0)


@dataclass(frozen=True)
class Estimate:
    """One quadrature result; n is per component (triangle or point-set half)."""

    value: float
    n_per_component: int
    epsilon: float
    method: str
    replicates: int = 1
    replicate_sd: float | None = None
    seed: int | None = None


@dataclass(frozen=True)
class StripGeometry:
    """The two triangles left after removing the diagonal band of width epsilon."""

    epsilon: float
    upper: Triangle
    lower: Triangle
    volume_each: float


def epsilon_schedule(n: int, c: float = 1.0, eps_max: float = 0.25) -> float:
    """Band half-width min(c sqrt(ln n / n), eps_max) balancing the error terms."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if c <= 0.0:
        raise ValueError("c must be positive")
    if not 0.0 < eps_max < 1.0:
        raise ValueError("eps_max must lie in (0, 1)")
    return min(c * math.sqrt(math.log(n) / n), eps_max)


def strip_triangles(epsilon: float) -> StripGeometry:
    """Upper and lower triangles at distance epsilon from the diagonal."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    upper = Triangle((0.0, epsilon), (0.0, 1.0), (1.0 - epsilon, 1.0))
    lower = Triangle((epsilon, 0.0), (1.0, 0.0), (1.0, 1.0 - epsilon))
    return StripGeometry(
        epsilon=epsilon, upper=upper, lower=lower, volume_each=(1.0 - epsilon) ** 2 / 2.0
    )


def truncation_bound(B: float, A: float, epsilon: float) -> float:
    """Upper bound 2 B eps^(1-A) / (1-A) on the mass inside the band.

    Take absolute values inside the band integral: each cross-section at
    distance s contributes at most B s^(-A) over length at most 2, and
    integrating s from 0 to epsilon gives the bound.
    """
    if not 0.0 < A < 1.0:
        raise ValueError(f"A must lie in (0, 1), got {A}")
    if B <= 0.0 or epsilon <= 0.0:
        raise ValueError("B and epsilon must be positive")
    return 2.0 * B * epsilon ** (1.0 - A) / (1.0 - A)


def strip_components(
    f: DiagonalSingularIntegrand, n: int, epsilon: float
) -> tuple[float, float]:
    """Per-triangle parts (volume x mean) of the strip estimator."""
    geom = strip_triangles(epsilon)
    ref_pts = tvdc_points(REFERENCE, n)
    up = map_points(REFERENCE, geom.upper, ref_pts)
    lo = map_points(REFERENCE, geom.lower, ref_pts)
    mu_up = geom.volume_each * float(np.mean(f.eval(up)))
    mu_lo = geom.volume_each * float(np.mean(f.eval(lo)))
    return mu_up, mu_lo


def estimate_strip(
    f: DiagonalSingularIntegrand,
    n: int,
    c: float = 1.0,
    eps_override: float | None = None,
    eps_max: float = 0.25,
) -> Estimate:
    """Strip-avoiding estimate with n points on each of the two triangles.

    The schedule sees the total evaluation count 2n. Every evaluated point
    lies strictly inside its triangle, hence strictly farther than epsilon
    from the diagonal.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    eps = epsilon_schedule(2 * n, c, eps_max) if eps_override is None else eps_override
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    mu_up, mu_lo = strip_components(f, n, eps)
    return Estimate(value=mu_up + mu_lo, n_per_component=n, epsilon=eps, method="strip")


def bridge_psi(A: float, epsilon: float):
    """Even profile: |s|^(-A) outside the band, a C^1 quadratic inside.

    psi(s) = a + b s^2 on |s| < eps with b = -A eps^(-A-2)/2 and
    a = eps^(-A) (1 + A/2), matching value and slope at |s| = eps.
    """
    if not 0.0 < A < 1.0:
        raise ValueError(f"A must lie in (0, 1), got {A}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    a = epsilon**-A * (1.0 + A / 2.0)
    b = -A * epsilon ** (-A - 2.0) / 2.0

    def psi(s):
        s = np.asarray(s, dtype=np.float64)
        inside = np.abs(s) < epsilon
        body = np.abs(np.where(inside, 1.0, s)) ** (-A)
        return np.where(inside, a + b * s * s, body)

    return psi


def estimate_extension(
    f: DiagonalSingularIntegrand,
    n: int,
    epsilon: float,
    seq: SequenceSpec | None = None,
) -> Estimate:
    """Integrate the band-bridged extension h(x) psi(x2 - x1) over the square.

    Requires the product form f = |x1-x2|^(-A) h(x); the bridge replaces only
    the singular profile, leaving the modulator untouched.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if f.modulator is None:
        raise UnsupportedIntegrandError(
            f"{f.name} has no modulator; the band-bridged extension needs "
            "the product form |x1-x2|^(-A) h(x)"
        )
    if seq is None:
        seq = SequenceSpec(kind="halton")
    if seq.kind == "triangular-vdc":
        raise ValueError("extension estimates need points on the square, not a triangle")
    psi = bridge_psi(f.A, epsilon)
    if seq.kind == "halton":
        pts = halton_points(n, seq.start_index, seq.bases)
    else:
        pts = uniform_points(n, seq.seed)
    vals = f.modulator.fn(pts[:, 0], pts[:, 1]) * psi(pts[:, 1] - pts[:, 0])
    return Estimate(
        value=float(np.mean(vals)),
        n_per_component=n,
        epsilon=epsilon,
        method="extension",
        seed=seq.seed,
    )


def _transform_value(f: DiagonalSingularIntegrand, u: np.ndarray) -> float:
    g_up = transformed(f, "upper")
    g_lo = transformed(f, "lower")
    return 0.5 * (float(np.mean(g_up.eval(u))) + float(np.mean(g_lo.eval(u))))


def estimate_transform(
    f: DiagonalSingularIntegrand,
    n: int,
    mode: str = "halton",
    replicates: int = 32,
    seed: int | None = None,
) -> Estimate:
    """Square-root-transform estimate: (1/2) mean g over each triangle's pullback.

    Modes: ``halton`` (deterministic), ``rqmc`` (``replicates`` independent
    Cranley-Patterson shifts of the same Halton set; value is their mean and
    replicate_sd their sample standard deviation), ``mc`` (uniform points).
    Point sets never contain a zero coordinate, where g would diverge.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if mode == "halton":
        return Estimate(
            value=_transform_value(f, halton_points(n)),
            n_per_component=n,
            epsilon=0.0,
            method="transform-halton",
        )
    if mode == "rqmc":
        if seed is None:
            raise ValueError("rqmc mode requires a seed")
        if replicates < 2:
            raise ValueError("rqmc mode requires replicates >= 2")
        base = halton_points(n)
        vals = np.empty(replicates)
        for r in range(replicates):
            shift = np.random.default_rng(np.random.SeedSequence([seed, r])).random(2)
            vals[r] = _transform_value(f, cranley_patterson_shift(base, shift))
        return Estimate(
            value=float(np.mean(vals)),
            n_per_component=n,
            epsilon=0.0,
            method="transform-rqmc",
            replicates=replicates,
            replicate_sd=float(np.std(vals, ddof=1)),
            seed=seed,
        )
    if mode == "mc":
        if seed is None:
            raise ValueError("mc mode requires a seed")
        u = np.random.default_rng(seed).random((n, 2))
        u[u == 0.0] = _TINY
        return Estimate(
            value=_transform_value(f, u),
            n_per_component=n,
            epsilon=0.0,
            method="transform-mc",
            seed=seed,
        )
    raise ValueError(f"unknown transform mode {mode!r}")


def estimate_mc(
    f: DiagonalSingularIntegrand, n: int, seed: int | None, replicates: int = 1
) -> Estimate:
    """Plain Monte Carlo on the square (diagonal hits are redrawn by the generator)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if seed is None:
        raise ValueError("estimate_mc requires a seed")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    vals = np.empty(replicates)
    for r in range(replicates):
        rep_seed = seed if replicates == 1 else np.random.SeedSequence([seed, r])
        vals[r] = float(np.mean(f.eval(uniform_points(n, rep_seed))))
    return Estimate(
        value=float(np.mean(vals)),
        n_per_component=n,
        epsilon=0.0,
        method="mc",
        replicates=replicates,
        replicate_sd=float(np.std(vals, ddof=1)) if replicates > 1 else None,
        seed=seed,
    )
