"""Time the compiled kernels against the pure-Python (numpy) fallback.

Run as a script:

    python benchmarks/bench_kernels.py

Both backends are imported directly so the comparison works regardless of
which one the package selected at import time. Results are wall-clock medians
over repeated calls; the two backends must also agree bit-for-bit, which is
asserted before timing.
"""

from __future__ import annotations

import time

import numpy as np

from diagqmc import _kernels_py
from diagqmc._backend import BACKEND

try:
    from diagqmc import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _median_time(fn, repeats: int = 9) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    times.sort()
    return times[len(times) // 2]


def _bench(name, py_fn, c_fn, check_equal=True):
    if check_equal and c_fn is not None:
        a, b = py_fn(), c_fn()
        assert np.array_equal(np.asarray(a), np.asarray(b)), f"{name}: backends differ"
    t_py = _median_time(py_fn)
    row = [name, f"{t_py * 1e3:9.3f}"]
    if c_fn is None:
        row += ["      n/a", "    n/a"]
    else:
        t_c = _median_time(c_fn)
        row += [f"{t_c * 1e3:9.3f}", f"{t_py / t_c:6.1f}x"]
    print("  {:<28} {} {} {}".format(*row))


def main():
    print(f"selected backend: {BACKEND}")
    if _kernels_c is None:
        print("compiled kernels unavailable; timing the fallback only")
    print("  {:<28} {:>9} {:>9} {:>7}".format("kernel", "py (ms)", "c (ms)", "speedup"))

    idx_halton = np.arange(1, 2**16 + 1, dtype=np.int64)
    _bench(
        "radical_inverse b=2, 2^16",
        lambda: _kernels_py.radical_inverse(2, idx_halton),
        None if _kernels_c is None else (lambda: _kernels_c.radical_inverse(2, idx_halton)),
    )
    _bench(
        "radical_inverse b=3, 2^16",
        lambda: _kernels_py.radical_inverse(3, idx_halton),
        None if _kernels_c is None else (lambda: _kernels_c.radical_inverse(3, idx_halton)),
    )

    idx_tvdc = np.arange(4**8, dtype=np.int64)
    tri = (0.0, 0.0, 1.0, 0.0, 0.0, 1.0)
    _bench(
        "tvdc_centroids 4^8, depth 8",
        lambda: _kernels_py.tvdc_centroids(*tri, idx_tvdc, 8),
        None
        if _kernels_c is None
        else (lambda: _kernels_c.tvdc_centroids(*tri, idx_tvdc, 8)),
    )


if __name__ == "__main__":
    main()
