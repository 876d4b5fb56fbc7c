"""Build hook: compiles the optional graph-kernel extension when Cython is available.

The package is fully functional without the extension; chaintrace._kernels
falls back to the pure-Python implementation at import time.  Set
CHAINTRACE_NO_EXT=1 to skip compilation explicitly.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CHAINTRACE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "chaintrace._kernels._speedups",
                    ["src/chaintrace/_kernels/_speedups.pyx"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
