"""Integrands with a power-law singularity along the diagonal of the square.

The working family is f(x) = |x1 - x2|^(-A) h(x) with 0 < A < 1 and a smooth
bounded modulator h. Such f blows up like distance-to-the-diagonal to the
power -A, its first partials one power worse, its second partials two powers
worse; ``def1_check`` measures exactly those three envelopes. Composing f
with the square-root map tau (which flattens the diagonal onto an edge)
yields g(u) = f(tau(u)) with product-form envelopes in u1 and u2, measured
by ``def2_check``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class SingularEvaluationError(ArithmeticError):
    """An integrand was evaluated exactly on its singular set."""


class UnsupportedIntegrandError(TypeError):
    """An estimator needs structure (e.g. a modulator) this integrand lacks."""


# -- modulators ---------------------------------------------------------------


@dataclass(frozen=True)
class Modulator:
    """Smooth bounded factor h with analytic partials and sup-norm constants."""

    name: str
    fn: Callable
    d10: Callable
    d01: Callable
    d20: Callable
    d02: Callable
    d11: Callable
    sup: float
    sup_grad: float
    sup_hess: float
    exact_mu: Callable | None = None  # closed-form integral of |s|^(-A) h, if any


def _zeros(x1, x2):
    return np.zeros_like(x1)


_TWO_PI = 2.0 * math.pi

MODULATORS = {
    "one": Modulator(
        name="one",
        fn=lambda x1, x2: np.ones_like(x1),
        d10=_zeros,
        d01=_zeros,
        d20=_zeros,
        d02=_zeros,
        d11=_zeros,
        sup=1.0,
        sup_grad=0.0,
        sup_hess=0.0,
        exact_mu=lambda A: 2.0 / ((1.0 - A) * (2.0 - A)),
    ),
    "poly": Modulator(
        name="poly",
        fn=lambda x1, x2: 1.0 + x1 * x2,
        d10=lambda x1, x2: x2 + np.zeros_like(x1),
        d01=lambda x1, x2: x1 + np.zeros_like(x2),
        d20=_zeros,
        d02=_zeros,
        d11=lambda x1, x2: np.ones_like(x1),
        sup=2.0,
        sup_grad=1.0,
        sup_hess=1.0,
        exact_mu=lambda A: 2.0 * (5.0 - A) / ((1.0 - A) * (2.0 - A) * (4.0 - A)),
    ),
    "trig": Modulator(
        name="trig",
        fn=lambda x1, x2: 2.0 + np.sin(_TWO_PI * x1) * np.cos(_TWO_PI * x2),
        d10=lambda x1, x2: _TWO_PI * np.cos(_TWO_PI * x1) * np.cos(_TWO_PI * x2),
        d01=lambda x1, x2: -_TWO_PI * np.sin(_TWO_PI * x1) * np.sin(_TWO_PI * x2),
        d20=lambda x1, x2: -_TWO_PI**2 * np.sin(_TWO_PI * x1) * np.cos(_TWO_PI * x2),
        d02=lambda x1, x2: -_TWO_PI**2 * np.sin(_TWO_PI * x1) * np.cos(_TWO_PI * x2),
        d11=lambda x1, x2: -_TWO_PI**2 * np.cos(_TWO_PI * x1) * np.sin(_TWO_PI * x2),
        sup=3.0,
        sup_grad=_TWO_PI,
        sup_hess=_TWO_PI**2,
        exact_mu=None,
    ),
}


# -- integrand type -----------------------------------------------------------


@dataclass(frozen=True)
class DiagonalSingularIntegrand:
    """An integrand on the square, singular (at worst) along x1 = x2.

    ``B`` is a constant valid for all three derivative orders of the envelope
    |d^k f| <= B |x1-x2|^(-A-k); ``modulator`` is set when f has the product
    form |x1-x2|^(-A) h(x), which the oracle and the band-bridged estimator
    require. ``partials`` holds analytic first/second partials when known.
    """

    name: str
    A: float
    B: float
    fn: Callable = field(repr=False)
    exact_integral: float | None = None
    modulator: Modulator | None = None
    partials: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 < self.A < 1.0:
            raise ValueError(f"A must lie in (0, 1), got {self.A}")
        if not self.B > 0.0:
            raise ValueError(f"B must be positive, got {self.B}")

    def eval(self, x):
        """Evaluate at one point (2,) or a batch (n, 2)."""
        pts = np.asarray(x, dtype=np.float64)
        scalar = pts.ndim == 1
        pts = pts.reshape(-1, 2)
        vals = self.fn(pts[:, 0], pts[:, 1])
        return float(vals[0]) if scalar else vals

    __call__ = eval


def _check_off_diagonal(x1, x2):
    if np.any(x1 == x2):
        raise SingularEvaluationError("evaluation on the diagonal x1 == x2")


def _power_parts(A):
    def p(s):
        return np.abs(s) ** (-A)

    def p1(s):
        return -A * np.sign(s) * np.abs(s) ** (-A - 1.0)

    def p2(s):
        return A * (A + 1.0) * np.abs(s) ** (-A - 2.0)

    return p, p1, p2


def modulated(A: float, h_id: str = "one") -> DiagonalSingularIntegrand:
    """f(x) = |x1 - x2|^(-A) h(x) for a named modulator h."""
    if h_id not in MODULATORS:
        raise ValueError(f"unknown modulator {h_id!r}, have {sorted(MODULATORS)}")
    if not 0.0 < A < 1.0:
        raise ValueError(f"A must lie in (0, 1), got {A}")
    h = MODULATORS[h_id]
    p, p1, p2 = _power_parts(A)

    def fn(x1, x2):
        _check_off_diagonal(x1, x2)
        return p(x1 - x2) * h.fn(x1, x2)

    # product rule against p(s), s = x1 - x2
    def f10(x1, x2):
        s = x1 - x2
        return p1(s) * h.fn(x1, x2) + p(s) * h.d10(x1, x2)

    def f01(x1, x2):
        s = x1 - x2
        return -p1(s) * h.fn(x1, x2) + p(s) * h.d01(x1, x2)

    def f20(x1, x2):
        s = x1 - x2
        return p2(s) * h.fn(x1, x2) + 2.0 * p1(s) * h.d10(x1, x2) + p(s) * h.d20(x1, x2)

    def f02(x1, x2):
        s = x1 - x2
        return p2(s) * h.fn(x1, x2) - 2.0 * p1(s) * h.d01(x1, x2) + p(s) * h.d02(x1, x2)

    def f11(x1, x2):
        s = x1 - x2
        return (
            -p2(s) * h.fn(x1, x2)
            + p1(s) * (h.d01(x1, x2) - h.d10(x1, x2))
            + p(s) * h.d11(x1, x2)
        )

    # one constant covering |f| <= B|s|^-A, |df| <= B|s|^-A-1, |d2f| <= B|s|^-A-2
    B = max(
        h.sup,
        A * h.sup + h.sup_grad,
        A * (A + 1.0) * h.sup + 2.0 * A * h.sup_grad + h.sup_hess,
    )
    name = f"proto(A={A:g})" if h_id == "one" else f"mod-{h_id}(A={A:g})"
    return DiagonalSingularIntegrand(
        name=name,
        A=A,
        B=B,
        fn=fn,
        exact_integral=None if h.exact_mu is None else h.exact_mu(A),
        modulator=h,
        partials={"f10": f10, "f01": f01, "f20": f20, "f02": f02, "f11": f11},
    )


def prototype(A: float) -> DiagonalSingularIntegrand:
    """The bare power law |x1 - x2|^(-A); integral 2/((1-A)(2-A))."""
    return modulated(A, "one")


def constant(c: float, A: float = 0.5) -> DiagonalSingularIntegrand:
    """Constant integrand (no singular set); useful as an exactness probe."""

    def fn(x1, x2):
        return np.full_like(np.asarray(x1, dtype=np.float64), c)

    zero = {k: _zeros for k in ("f10", "f01", "f20", "f02", "f11")}
    return DiagonalSingularIntegrand(
        name=f"const({c:g})",
        A=A,
        B=max(abs(c), 1.0),
        fn=fn,
        exact_integral=float(c),
        modulator=None,
        partials=zero,
    )


# -- one-sided extensions across the diagonal --------------------------------


def extension_pair(A: float, epsilon: float):
    """Two integrands agreeing above the diagonal but extended differently below.

    The first continues -|w|^(-A) (w = x2 - x1 > 0) as an odd function; the
    second keeps +|w|^(-A) and bridges the band -eps <= w < 0 with the
    quadratic whose value, slope, and curvature at w = -eps mirror those of
    the positive branch at w = +eps (so the junction is smooth seen from the
    band, while the outer |w|^(-A) branch meets it with the reflected slope).
    Their L1 gap over the band is at least the band mass
    2(eps^(1-A)/(1-A) - eps^(2-A)/(2-A)), which no choice of bridge removes.
    """
    if not 0.0 < A < 1.0:
        raise ValueError(f"A must lie in (0, 1), got {A}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")

    def odd_fn(x1, x2):
        _check_off_diagonal(x1, x2)
        w = x2 - x1
        return np.where(w > 0.0, -1.0, 1.0) * np.abs(w) ** (-A)

    c0 = epsilon**-A
    c1 = -A * epsilon ** (-A - 1.0)
    c2 = A * (A + 1.0) * epsilon ** (-A - 2.0)

    def bridged_fn(x1, x2):
        _check_off_diagonal(x1, x2)
        w = x2 - x1
        in_band = (w >= -epsilon) & (w < 0.0)
        # avoid 0**-A warnings on the branch not taken
        body = np.abs(np.where(in_band, 1.0, w)) ** (-A)
        u = w + epsilon
        bridge = c0 + c1 * u + 0.5 * c2 * u * u
        return np.where(in_band, bridge, body)

    B = (1.0 + A + 0.5 * A * (A + 1.0)) * max(1.0, A * (A + 1.0))
    odd = DiagonalSingularIntegrand(
        name=f"odd-continuation(A={A:g})",
        A=A,
        B=max(1.0, A * (A + 1.0)),
        fn=odd_fn,
    )
    bridged = DiagonalSingularIntegrand(
        name=f"bridged-continuation(A={A:g},eps={epsilon:g})",
        A=A,
        B=B,
        fn=bridged_fn,
    )
    return odd, bridged


# -- square-root transform ----------------------------------------------------


def transform_tau(u, half: str = "upper") -> np.ndarray:
    """Map the square onto one triangle beside the diagonal.

    upper: (u1, u2) -> ((1-u1) sqrt(u2), sqrt(u2)), covering x1 <= x2; lower
    swaps the two outputs. The map itself tolerates zero coordinates; only
    composed integrands refuse them.
    """
    if half not in ("upper", "lower"):
        raise ValueError(f"half must be 'upper' or 'lower', got {half!r}")
    uu = np.asarray(u, dtype=np.float64)
    scalar = uu.ndim == 1
    uu = uu.reshape(-1, 2)
    if np.any(uu < 0.0) or np.any(uu > 1.0):
        raise ValueError("u must lie in the unit square")
    r = np.sqrt(uu[:, 1])
    x = np.empty_like(uu)
    if half == "upper":
        x[:, 0] = (1.0 - uu[:, 0]) * r
        x[:, 1] = r
    else:
        x[:, 0] = r
        x[:, 1] = (1.0 - uu[:, 0]) * r
    return x[0] if scalar else x


@dataclass(frozen=True)
class TransformedIntegrand:
    """g(u) = f(tau(u)): the singular diagonal becomes the edge u1 = 0.

    Product-form bases evaluate the singular factor as u1^(-A) u2^(-A/2)
    directly. The distance |x1 - x2| equals u1 sqrt(u2) algebraically, and
    only the direct form survives in floating point: composed through tau,
    the two coordinates collide once u1 drops below 2^-53. Bases without a
    modulator use the composed path and inherit that limitation.
    """

    base: DiagonalSingularIntegrand
    half: str = "upper"

    def __post_init__(self):
        if self.half not in ("upper", "lower"):
            raise ValueError(f"half must be 'upper' or 'lower', got {self.half!r}")

    @property
    def name(self) -> str:
        return f"tau[{self.half}]-{self.base.name}"

    def eval(self, u):
        uu = np.asarray(u, dtype=np.float64)
        scalar = uu.ndim == 1
        uu = uu.reshape(-1, 2)
        if np.any(uu <= 0.0):
            if np.any(uu < 0.0):
                raise ValueError("u must lie in the unit square")
            raise SingularEvaluationError("g diverges on u1 = 0 and u2 = 0")
        mod = self.base.modulator
        if mod is None:
            vals = self.base.eval(transform_tau(uu, self.half))
        else:
            u1, su2 = uu[:, 0], np.sqrt(uu[:, 1])
            far, near = su2, (1.0 - u1) * su2
            x1, x2 = (near, far) if self.half == "upper" else (far, near)
            vals = u1 ** -self.base.A * su2 ** -self.base.A * mod.fn(x1, x2)
        return float(vals[0]) if scalar else vals

    __call__ = eval


def transformed(f: DiagonalSingularIntegrand, half: str = "upper") -> TransformedIntegrand:
    return TransformedIntegrand(base=f, half=half)


# -- a deliberately non-product singular integrand ----------------------------


def diag_ripple(A: float, levels: int = 24) -> DiagonalSingularIntegrand:
    """Power-law singularity whose diagonal-direction derivative saturates.

    At every dyadic scale |x1-x2| ~ 2^-j (j <= levels) the integrand carries
    an oscillation sin(2^j (x1+x2)) windowed by a log2 partition of unity, so
    d/d(x1+x2) is of order |x1-x2|^(-A-1): as large as the envelope allows.
    No smooth modulator reproduces that, and the transformed g01 envelope
    degrades by a factor u1^(-1) -- the behavior def1/def2 ratio scans are
    built to expose. Integral and partials are not provided.
    """
    if not 0.0 < A < 1.0:
        raise ValueError(f"A must lie in (0, 1), got {A}")
    if levels < 1:
        raise ValueError("levels must be >= 1")

    def fn(x1, x2):
        _check_off_diagonal(x1, x2)
        r = np.abs(x1 - x2)
        t = x1 + x2
        y = -np.log2(r)
        j0 = np.floor(y)
        acc = np.zeros_like(r)
        for off in (0.0, 1.0):
            j = j0 + off
            ok = (j >= 1.0) & (j <= levels)
            jj = np.where(ok, j, 1.0)
            w = np.cos(0.5 * np.pi * (y - jj)) ** 2
            acc += np.where(ok, w * np.sin(np.ldexp(1.0, jj.astype(np.int32)) * t), 0.0)
        return r ** (-A) * (1.0 + 0.25 * acc)

    return DiagonalSingularIntegrand(
        name=f"ripple(A={A:g},levels={levels})",
        A=A,
        B=10.0,
        fn=fn,
    )


# -- regularity scans ---------------------------------------------------------


@dataclass(frozen=True)
class Def1Report:
    """Envelope constants measured on a grid that avoids the diagonal.

    ``max_ratio[m][k]`` is the largest |d^k f| |x1-x2|^(A+k) over the m x m
    grid (k = 0, 1, 2; first/second derivatives by central differences);
    ``near_ratio`` restricts to band <= |x1-x2| <= 10 band, the region that
    actually probes the singularity.
    """

    A: float
    B: float
    band: float
    max_ratio: dict
    near_ratio: dict
    passed: bool


def def1_check(
    f: DiagonalSingularIntegrand,
    grid_sizes=(32, 64),
    band: float = 1e-3,
    step1: float = 1e-5,
    step2: float = 1e-4,
    slack: float = 0.10,
) -> Def1Report:
    """Measure the three diagonal envelopes of f on uniform grids.

    Passes when every ratio is at most B (1 + slack). The evaluation band
    keeps all finite-difference stencil points off the diagonal.
    """
    if band <= 2.0 * max(step1, step2):
        raise ValueError("band must exceed twice the largest step")
    A = f.A
    margin = max(band, 2.5 * max(step1, step2))
    max_ratio = {}
    near_ratio = {}
    for m in grid_sizes:
        if m < 2:
            raise ValueError("grid size must be >= 2")
        xs = np.linspace(margin, 1.0 - margin, m)
        x1, x2 = np.meshgrid(xs, xs, indexing="ij")
        x1, x2 = x1.ravel(), x2.ravel()
        keep = np.abs(x1 - x2) >= band
        x1, x2 = x1[keep], x2[keep]
        s = np.abs(x1 - x2)

        def ev(dx, dy):
            return f.fn(x1 + dx, x2 + dy)

        g0 = np.abs(ev(0.0, 0.0))
        d10 = (ev(step1, 0.0) - ev(-step1, 0.0)) / (2.0 * step1)
        d01 = (ev(0.0, step1) - ev(0.0, -step1)) / (2.0 * step1)
        g1 = np.maximum(np.abs(d10), np.abs(d01))
        fc = ev(0.0, 0.0)
        d20 = (ev(step2, 0.0) - 2.0 * fc + ev(-step2, 0.0)) / step2**2
        d02 = (ev(0.0, step2) - 2.0 * fc + ev(0.0, -step2)) / step2**2
        d11 = (
            ev(step2, step2) - ev(step2, -step2) - ev(-step2, step2) + ev(-step2, -step2)
        ) / (4.0 * step2**2)
        g2 = np.maximum(np.abs(d20), np.maximum(np.abs(d02), np.abs(d11)))

        ratios = (g0 * s**A, g1 * s ** (A + 1.0), g2 * s ** (A + 2.0))
        near = s <= 10.0 * band
        max_ratio[m] = {k: float(r.max()) for k, r in enumerate(ratios)}
        near_ratio[m] = {
            k: (float(r[near].max()) if np.any(near) else 0.0)
            for k, r in enumerate(ratios)
        }
    bound = f.B * (1.0 + slack)
    passed = all(v <= bound for per in max_ratio.values() for v in per.values())
    return Def1Report(
        A=A, B=f.B, band=band, max_ratio=max_ratio, near_ratio=near_ratio, passed=passed
    )


@dataclass(frozen=True)
class Def2Report:
    """Product-envelope constants of g on geometric grids u = 2^-j.

    ``max_ratio[m][key]`` is the largest |d^key g| u1^(A1+i) u2^(A2+j) over
    the m x m grid (key in g, g10, g01, g11). ``constants`` records the max
    over all grids. Passing means the finest grid's maxima stay within
    (1 + slack) of the coarsest grid's: a true product envelope is scale-free,
    while a defective one grows as the grid reaches deeper scales.
    """

    A1: float
    A2: float
    max_ratio: dict
    constants: dict
    passed: bool


def def2_check(
    g,
    A1: float,
    A2: float,
    grid_sizes=(32, 64, 128),
    rel_step1: float = 1e-5,
    rel_step2: float = 1e-4,
    slack: float = 0.10,
) -> Def2Report:
    """Measure the four corner envelopes of a transformed integrand.

    Steps are relative (h = r u) because the grid is geometric; central
    differences of power-law envelopes are then equally accurate at every
    scale.
    """
    gev = g.eval if hasattr(g, "eval") else g
    sizes = sorted(grid_sizes)
    max_ratio = {}
    for m in sizes:
        if m < 2:
            raise ValueError("grid size must be >= 2")
        u = 2.0 ** -np.arange(1, m + 1, dtype=np.float64)
        u1, u2 = np.meshgrid(u, u, indexing="ij")
        u1, u2 = u1.ravel(), u2.ravel()

        def ev(r1, r2):
            return gev(np.column_stack([u1 * (1.0 + r1), u2 * (1.0 + r2)]))

        h1, h2 = rel_step1 * u1, rel_step1 * u2
        g0 = np.abs(ev(0.0, 0.0))
        g10 = np.abs(ev(rel_step1, 0.0) - ev(-rel_step1, 0.0)) / (2.0 * h1)
        g01 = np.abs(ev(0.0, rel_step1) - ev(0.0, -rel_step1)) / (2.0 * h2)
        H1, H2 = rel_step2 * u1, rel_step2 * u2
        g11 = np.abs(
            ev(rel_step2, rel_step2)
            - ev(rel_step2, -rel_step2)
            - ev(-rel_step2, rel_step2)
            + ev(-rel_step2, -rel_step2)
        ) / (4.0 * H1 * H2)

        max_ratio[m] = {
            "g": float(np.max(g0 * u1**A1 * u2**A2)),
            "g10": float(np.max(g10 * u1 ** (A1 + 1.0) * u2**A2)),
            "g01": float(np.max(g01 * u1**A1 * u2 ** (A2 + 1.0))),
            "g11": float(np.max(g11 * u1 ** (A1 + 1.0) * u2 ** (A2 + 1.0))),
        }
    keys = ("g", "g10", "g01", "g11")
    constants = {k: max(max_ratio[m][k] for m in sizes) for k in keys}
    coarse, fine = max_ratio[sizes[0]], max_ratio[sizes[-1]]
    passed = all(
        math.isfinite(constants[k]) and fine[k] <= coarse[k] * (1.0 + slack)
        for k in keys
    )
    return Def2Report(
        A1=A1, A2=A2, max_ratio=max_ratio, constants=constants, passed=passed
    )
