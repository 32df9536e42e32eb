"""Build script for the optional compiled kernels.

The package is pure Python plus one Cython extension (diagqmc._kernels)
holding the per-index digit loops. Building it needs Cython, NumPy and a C
compiler in the environment (install with ``pip install -e . --no-build-isolation``).
If any of that is missing the install still succeeds and the package falls
back to the NumPy kernels at import time.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Let the extension build fail without failing the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, mostly
            warnings.warn("skipping compiled kernels: %s" % exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn("skipping %s: %s" % (ext.name, exc))


def extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError as exc:
        warnings.warn("Cython/NumPy unavailable, no compiled kernels: %s" % exc)
        return []
    ext = Extension(
        "diagqmc._kernels",
        ["src/diagqmc/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
