"""Low-discrepancy and uniform point sets on the unit square.

Halton points use the radical inverse in coprime bases (2, 3 by default) and
by convention start at index 1, so no coordinate is ever exactly zero.
Randomization is a Cranley-Patterson shift: one uniform offset added to all
points modulo 1, which keeps each individual point uniformly distributed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from diagqmc._backend import radical_inverse_many

KINDS = ("halton", "triangular-vdc", "uniform-random")

_TINY = np.nextafter(0.0, 1.0)  # smallest positive double


@dataclass(frozen=True)
class SequenceSpec:
    """Point-set request: which generator, where it starts, how it is seeded."""

    kind: str
    start_index: int = 1
    bases: tuple[int, int] = (2, 3)
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        b1, b2 = self.bases
        if b1 < 2 or b2 < 2:
            raise ValueError("bases must be >= 2")
        if math.gcd(b1, b2) != 1:
            raise ValueError(f"bases {self.bases} are not coprime")
        if self.kind == "halton" and self.start_index < 1:
            raise ValueError("halton start_index must be >= 1 (index 0 is the origin)")
        if self.kind == "uniform-random" and self.seed is None:
            raise ValueError("uniform-random requires a seed")


def radical_inverse(base: int, index) -> float:
    """Reflect the base-``base`` digits of ``index`` about the radix point.

    ``index`` may be an int or an integer array; arrays come back as float64
    arrays. Exact in double precision for any index representable in 64 bits.
    """
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    scalar = np.isscalar(index) or getattr(index, "ndim", 1) == 0
    idx = np.atleast_1d(np.asarray(index, dtype=np.int64))
    if np.any(idx < 0):
        raise ValueError("index must be >= 0")
    out = radical_inverse_many(base, np.ascontiguousarray(idx))
    return float(out[0]) if scalar else out


def halton_points(n: int, start_index: int = 1, bases: tuple[int, int] = (2, 3)) -> np.ndarray:
    """First ``n`` Halton points from ``start_index`` on, as an (n, 2) array.

    Index-addressed: ``halton_points(n, s)`` equals the concatenation of
    ``halton_points(k, s)`` and ``halton_points(n - k, s + k)``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if start_index < 1:
        raise ValueError("start_index must be >= 1")
    if math.gcd(bases[0], bases[1]) != 1:
        raise ValueError(f"bases {bases} are not coprime")
    idx = np.arange(start_index, start_index + n, dtype=np.int64)
    pts = np.empty((n, 2), dtype=np.float64)
    pts[:, 0] = radical_inverse_many(bases[0], idx)
    pts[:, 1] = radical_inverse_many(bases[1], idx)
    return pts


def cranley_patterson_shift(points: np.ndarray, shift) -> np.ndarray:
    """Add ``shift`` to every point modulo 1, per coordinate.

    A coordinate that lands exactly on 0.0 is bumped to the smallest positive
    double: downstream transformed integrands diverge at zero and the wrap is
    an artifact of finite precision, not of the rotation.
    """
    pts = np.asarray(points, dtype=np.float64)
    sh = np.asarray(shift, dtype=np.float64)
    if np.any(sh < 0.0) or np.any(sh >= 1.0):
        raise ValueError("shift coordinates must lie in [0, 1)")
    out = np.mod(pts + sh, 1.0)
    out[out == 0.0] = _TINY
    return out


def uniform_points(n: int, seed) -> np.ndarray:
    """n iid uniform points on the square with rows having x1 == x2 redrawn."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if seed is None:
        raise ValueError("uniform_points requires a seed")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    bad = pts[:, 0] == pts[:, 1]
    while np.any(bad):
        pts[bad] = rng.random((int(bad.sum()), 2))
        bad = pts[:, 0] == pts[:, 1]
    return pts


def generate(spec: SequenceSpec, n: int, triangle=None) -> np.ndarray:
    """Materialize ``n`` points for a SequenceSpec.

    ``triangular-vdc`` needs the target ``triangle`` (a trianglepts.Triangle);
    the other kinds ignore it.
    """
    if spec.kind == "halton":
        return halton_points(n, spec.start_index, spec.bases)
    if spec.kind == "uniform-random":
        return uniform_points(n, spec.seed)
    if triangle is None:
        raise ValueError("triangular-vdc generation requires a triangle")
    from diagqmc.trianglepts import tvdc_points

    return tvdc_points(triangle, n)
