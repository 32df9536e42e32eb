"""Kernel backend selection.

Prefers the compiled Cython kernels, falls back to the NumPy twins when the
extension was not built. ``DIAGQMC_PURE_PYTHON=1`` forces the fallback (used
by the benchmark and the backend-equality tests). Both backends produce
bit-identical output.
"""

import os
import warnings

if os.environ.get("DIAGQMC_PURE_PYTHON"):
    from diagqmc import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from diagqmc import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from diagqmc import _kernels_py as _impl

        BACKEND = "python"
        warnings.warn(
            "diagqmc._kernels extension not built; using the NumPy kernels "
            "(correct but slower)"
        )

radical_inverse_many = _impl.radical_inverse
tvdc_centroids = _impl.tvdc_centroids


def kernel_backend():
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return BACKEND
