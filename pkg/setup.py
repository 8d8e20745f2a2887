"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time), so failure to build it is downgraded to a warning.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/meao/_core.pyx"],
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False},
    )
    include_dirs = [numpy.get_include()]
except Exception as exc:  # pragma: no cover - build environment dependent
    warnings.warn(f"compiled kernels disabled: {exc}")
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)
