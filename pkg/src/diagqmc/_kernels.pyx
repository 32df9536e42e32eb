#cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled digit-loop kernels.

Reference implementations live in ``diagqmc._kernels_py``; the two must stay
operation-for-operation identical so that backend choice never changes output
bits. See that module for the child-labeling convention.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def radical_inverse(long long base, cnp.int64_t[::1] indices):
    """Base-``base`` radical inverse of each index (int64 array) as float64."""
    cdef Py_ssize_t n = indices.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double inv = 1.0 / base
    cdef double r, f
    cdef long long i
    cdef Py_ssize_t k
    for k in range(n):
        i = indices[k]
        r = 0.0
        f = inv
        while i > 0:
            r += (i % base) * f
            i //= base
            f *= inv
        out[k] = r
    return out_arr


def tvdc_centroids(double ax, double ay, double bx, double by,
                   double cx, double cy,
                   cnp.int64_t[::1] indices, int depth):
    """Centroids of the depth-``depth`` medial cells selected by base-4 digits."""
    cdef Py_ssize_t n = indices.shape[0]
    out_arr = np.empty((n, 2), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double pax, pay, pbx, pby, pcx, pcy
    cdef double mabx, maby, macx, macy, mbcx, mbcy
    cdef long long i
    cdef int level, d
    cdef Py_ssize_t k
    for k in range(n):
        i = indices[k]
        pax = ax; pay = ay
        pbx = bx; pby = by
        pcx = cx; pcy = cy
        for level in range(depth):
            d = <int>(i & 3)
            i >>= 2
            mabx = (pax + pbx) * 0.5
            maby = (pay + pby) * 0.5
            macx = (pax + pcx) * 0.5
            macy = (pay + pcy) * 0.5
            mbcx = (pbx + pcx) * 0.5
            mbcy = (pby + pcy) * 0.5
            if d == 0:
                pax = mbcx; pay = mbcy
                pbx = macx; pby = macy
                pcx = mabx; pcy = maby
            elif d == 1:
                pbx = mabx; pby = maby
                pcx = macx; pcy = macy
            elif d == 2:
                pax = mabx; pay = maby
                pcx = mbcx; pcy = mbcy
            else:
                pax = macx; pay = macy
                pbx = mbcx; pby = mbcy
        out[k, 0] = (pax + pbx + pcx) / 3.0
        out[k, 1] = (pay + pby + pcy) / 3.0
    return out_arr
