"""Build script for the optional compiled trial kernels.

Set MESHREL_PURE=1 to skip the extension and install the pure-Python
package only; the kernel backend falls back automatically at import time.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build environment without Cython
    cythonize = None


def extensions():
    if cythonize is None or os.environ.get("MESHREL_PURE"):
        return []
    ext = Extension(
        "meshrel._kernels._mc_cy",
        sources=["src/meshrel/_kernels/_mc_cy.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(ext_modules=extensions())
