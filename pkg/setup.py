"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension; the kernels
subpackage falls back to a NumPy implementation at import time.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "squidgate.kernels._kernels",
                ["src/squidgate/kernels/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
