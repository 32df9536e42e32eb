"""Triangles, medial subdivision, and triangular van der Corput point sets.

A triangle splits into four medial children (the middle triangle plus one at
each corner). Writing a point index in base 4, least significant digit first,
and descending one child per digit reaches a depth-K cell; the point is that
cell's centroid. Indices 0..4^K-1 therefore hit every depth-K cell exactly
once, which is the stratification property the quadrature layer relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from diagqmc._backend import tvdc_centroids


class BarycentricCoord(NamedTuple):
    wa: float
    wb: float
    wc: float


@dataclass(frozen=True)
class Triangle:
    """Planar triangle given by its vertices, validated non-degenerate."""

    a: tuple[float, float]
    b: tuple[float, float]
    c: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "a", (float(self.a[0]), float(self.a[1])))
        object.__setattr__(self, "b", (float(self.b[0]), float(self.b[1])))
        object.__setattr__(self, "c", (float(self.c[0]), float(self.c[1])))
        if self.signed_area == 0.0:
            raise ValueError(f"degenerate triangle: {self.a}, {self.b}, {self.c}")

    @property
    def signed_area(self) -> float:
        (ax, ay), (bx, by), (cx, cy) = self.a, self.b, self.c
        return 0.5 * ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))

    @property
    def area(self) -> float:
        return abs(self.signed_area)

    @property
    def centroid(self) -> tuple[float, float]:
        (ax, ay), (bx, by), (cx, cy) = self.a, self.b, self.c
        return ((ax + bx + cx) / 3.0, (ay + by + cy) / 3.0)

    def vertex_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=np.float64)


def triangle_dict(t: Triangle) -> dict:
    """JSON-ready form {"a": [x, y], "b": [x, y], "c": [x, y]}."""
    return {"a": list(t.a), "b": list(t.b), "c": list(t.c)}


REFERENCE = Triangle((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))


def _mid(p, q):
    return ((p[0] + q[0]) * 0.5, (p[1] + q[1]) * 0.5)


def medial_subtriangles(t: Triangle) -> list[Triangle]:
    """The four medial children, in child order 0 (middle), 1, 2, 3 (corners)."""
    mab = _mid(t.a, t.b)
    mac = _mid(t.a, t.c)
    mbc = _mid(t.b, t.c)
    return [
        Triangle(mbc, mac, mab),
        Triangle(t.a, mab, mac),
        Triangle(mab, t.b, mbc),
        Triangle(mac, mbc, t.c),
    ]


def _required_depth(n: int) -> int:
    depth = 1
    while 4**depth < n:
        depth += 1
    return depth


def tvdc_point(t: Triangle, index: int, depth: int) -> np.ndarray:
    """Point ``index`` of the depth-``depth`` triangular van der Corput set."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not 0 <= index < 4**depth:
        raise ValueError(f"index {index} outside [0, 4^{depth})")
    (ax, ay), (bx, by), (cx, cy) = t.a, t.b, t.c
    idx = np.array([index], dtype=np.int64)
    return tvdc_centroids(ax, ay, bx, by, cx, cy, idx, depth)[0]


def tvdc_points(t: Triangle, n: int, depth: int | None = None) -> np.ndarray:
    """First ``n`` triangular van der Corput points of ``t`` as an (n, 2) array.

    Depth defaults to the smallest K with 4^K >= n, so n = 4^K uses every
    depth-K cell exactly once.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if depth is None:
        depth = _required_depth(n)
    elif 4**depth < n:
        raise ValueError(f"depth {depth} too small for n = {n}")
    (ax, ay), (bx, by), (cx, cy) = t.a, t.b, t.c
    idx = np.arange(n, dtype=np.int64)
    return tvdc_centroids(ax, ay, bx, by, cx, cy, idx, depth)


def barycentric(t: Triangle, point) -> BarycentricCoord:
    """Barycentric coordinates of ``point`` with respect to ``t``."""
    w = _barycentric_many(t, np.asarray(point, dtype=np.float64).reshape(1, 2))[0]
    return BarycentricCoord(float(w[0]), float(w[1]), float(w[2]))


def from_barycentric(t: Triangle, coord) -> np.ndarray:
    """Point with barycentric coordinates ``coord`` (any triple summing to 1)."""
    w = np.asarray(coord, dtype=np.float64)
    return w @ t.vertex_array()


def _barycentric_many(t: Triangle, pts: np.ndarray) -> np.ndarray:
    (ax, ay), (bx, by), (cx, cy) = t.a, t.b, t.c
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    px = pts[:, 0] - ax
    py = pts[:, 1] - ay
    wb = (px * (cy - ay) - py * (cx - ax)) / det
    wc = ((bx - ax) * py - (by - ay) * px) / det
    wa = 1.0 - wb - wc
    return np.column_stack([wa, wb, wc])


def map_points(src: Triangle, dst: Triangle, pts) -> np.ndarray:
    """Transport points by the affine map sending src's vertices to dst's."""
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    return _barycentric_many(src, pts) @ dst.vertex_array()


def cell_indices(t: Triangle, pts, depth: int) -> np.ndarray:
    """Depth-``depth`` cell index of each point, boundary ties to the lowest child.

    Inverse of the tvdc descent: digit k (least significant first) is the
    child containing the point at subdivision level k.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    n = pts.shape[0]
    px, py = pts[:, 0], pts[:, 1]
    pax = np.full(n, t.a[0])
    pay = np.full(n, t.a[1])
    pbx = np.full(n, t.b[0])
    pby = np.full(n, t.b[1])
    pcx = np.full(n, t.c[0])
    pcy = np.full(n, t.c[1])
    out = np.zeros(n, dtype=np.int64)
    for level in range(depth):
        mabx, maby = (pax + pbx) * 0.5, (pay + pby) * 0.5
        macx, macy = (pax + pcx) * 0.5, (pay + pcy) * 0.5
        mbcx, mbcy = (pbx + pcx) * 0.5, (pby + pcy) * 0.5
        children = (
            (mbcx, mbcy, macx, macy, mabx, maby),
            (pax, pay, mabx, maby, macx, macy),
            (mabx, maby, pbx, pby, mbcx, mbcy),
            (macx, macy, mbcx, mbcy, pcx, pcy),
        )
        chosen = np.full(n, -1, dtype=np.int64)
        for j, (qax, qay, qbx, qby, qcx, qcy) in enumerate(children):
            det = (qbx - qax) * (qcy - qay) - (qby - qay) * (qcx - qax)
            ux, uy = px - qax, py - qay
            wb = (ux * (qcy - qay) - uy * (qcx - qax)) / det
            wc = ((qbx - qax) * uy - (qby - qay) * ux) / det
            wa = 1.0 - wb - wc
            inside = (wa >= 0.0) & (wb >= 0.0) & (wc >= 0.0) & (chosen < 0)
            chosen[inside] = j
        if np.any(chosen < 0):
            bad = int(np.argmax(chosen < 0))
            raise ValueError(f"point {pts[bad]} is outside the triangle")
        out += chosen << (2 * level)
        sel = [chosen == j for j in range(4)]
        nax = np.select(sel, [c[0] for c in children])
        nay = np.select(sel, [c[1] for c in children])
        nbx = np.select(sel, [c[2] for c in children])
        nby = np.select(sel, [c[3] for c in children])
        ncx = np.select(sel, [c[4] for c in children])
        ncy = np.select(sel, [c[5] for c in children])
        pax, pay, pbx, pby, pcx, pcy = nax, nay, nbx, nby, ncx, ncy
    return out


def _clipped_area_fraction(t: Triangle, normal: np.ndarray, offset: float) -> float:
    """Area fraction of ``t`` on the side ``x . normal <= offset``."""
    verts = t.vertex_array()
    d = verts @ normal - offset
    poly = []
    for i in range(3):
        cur, nxt = verts[i], verts[(i + 1) % 3]
        dc, dn = d[i], d[(i + 1) % 3]
        if dc <= 0.0:
            poly.append(cur)
        if dc * dn < 0.0:
            poly.append(cur + (nxt - cur) * (dc / (dc - dn)))
    if len(poly) < 3:
        return 0.0
    poly = np.asarray(poly)
    x, y = poly[:, 0], poly[:, 1]
    area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    return area / t.area


def approx_star_discrepancy(points, t: Triangle, n_test: int = 256, seed: int = 0) -> float:
    """Empirical discrepancy of ``points`` over random test subsets of ``t``.

    Test sets are similar copies of ``t`` shrunk toward a random vertex plus
    random half-plane cuts; the whole triangle is always included (its local
    discrepancy is 0 when every point lies inside). A lower bound on the true
    star discrepancy, good enough to rank point sets.
    """
    if n_test < 1:
        raise ValueError("n_test must be >= 1")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("empty point set")
    n = pts.shape[0]
    bary = _barycentric_many(t, pts)
    rng = np.random.default_rng(seed)
    worst = abs(np.mean(np.all(bary >= 0.0, axis=1)) - 1.0)
    for k in range(n_test):
        if k % 2 == 0:
            v = int(rng.integers(0, 3))
            lam = float(rng.random())
            frac = float(np.count_nonzero(bary[:, v] >= 1.0 - lam)) / n
            worst = max(worst, abs(frac - lam * lam))
        else:
            theta = 2.0 * np.pi * float(rng.random())
            normal = np.array([np.cos(theta), np.sin(theta)])
            proj = t.vertex_array() @ normal
            offset = float(rng.uniform(proj.min(), proj.max()))
            frac = float(np.count_nonzero(pts @ normal <= offset)) / n
            worst = max(worst, abs(frac - _clipped_area_fraction(t, normal, offset)))
    return float(worst)
