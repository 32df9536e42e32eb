"""NumPy kernels: the fallback twin of the compiled ``diagqmc._kernels``.

Both backends perform the same floating point operations in the same order
(terminated digit loops contribute exact ``+ 0.0`` terms here), so their
outputs are bit-identical. Keep any change mirrored in ``_kernels.pyx``.
"""

import numpy as np


def radical_inverse(base, indices):
    """Base-``base`` radical inverse of each index (int64 array) as float64."""
    idx = np.array(indices, dtype=np.int64, copy=True)
    out = np.zeros(idx.shape, dtype=np.float64)
    inv = 1.0 / base
    f = np.full(idx.shape, inv, dtype=np.float64)
    while np.any(idx > 0):
        out += (idx % base) * f
        idx //= base
        f *= inv
    return out


def tvdc_centroids(ax, ay, bx, by, cx, cy, indices, depth):
    """Centroids of the depth-``depth`` medial cells selected by base-4 digits.

    Digit k of ``indices`` (least significant first) picks the child at
    subdivision level k: 0 the medial triangle ((b+c)/2,(a+c)/2,(a+b)/2),
    1/2/3 the corner triangles at a/b/c. Returns an (n, 2) float64 array.
    """
    idx = np.array(indices, dtype=np.int64, copy=True)
    n = idx.shape[0]
    pax = np.full(n, ax)
    pay = np.full(n, ay)
    pbx = np.full(n, bx)
    pby = np.full(n, by)
    pcx = np.full(n, cx)
    pcy = np.full(n, cy)
    for _ in range(depth):
        d = idx & 3
        idx >>= 2
        mabx = (pax + pbx) * 0.5
        maby = (pay + pby) * 0.5
        macx = (pax + pcx) * 0.5
        macy = (pay + pcy) * 0.5
        mbcx = (pbx + pcx) * 0.5
        mbcy = (pby + pcy) * 0.5
        s0 = d == 0
        s1 = d == 1
        s2 = d == 2
        # selection only, no new arithmetic: stays bit-identical to the
        # scalar branch in the compiled kernel
        pax, pay = (
            np.where(s0, mbcx, np.where(s1, pax, np.where(s2, mabx, macx))),
            np.where(s0, mbcy, np.where(s1, pay, np.where(s2, maby, macy))),
        )
        pbx, pby = (
            np.where(s0, macx, np.where(s1, mabx, np.where(s2, pbx, mbcx))),
            np.where(s0, macy, np.where(s1, maby, np.where(s2, pby, mbcy))),
        )
        pcx, pcy = (
            np.where(s0, mabx, np.where(s1, macx, np.where(s2, mbcx, pcx))),
            np.where(s0, maby, np.where(s1, macy, np.where(s2, mbcy, pcy))),
        )
    out = np.empty((n, 2), dtype=np.float64)
    out[:, 0] = (pax + pbx + pcx) / 3.0
    out[:, 1] = (pay + pby + pcy) / 3.0
    return out
