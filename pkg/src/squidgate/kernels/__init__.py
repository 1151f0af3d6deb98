"""Numeric kernels for the exact two-junction solver.

A compiled Cython extension is preferred when the build produced one;
otherwise the NumPy implementation is used.  Both expose the same
``scan_extrema`` entry point with identical semantics, and the test suite
checks their agreement whenever the extension is importable.
"""
from . import _kernels_py

try:  # compiled extension is optional
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    _impl = _kernels_py
    BACKEND = "python"

scan_extrema = _impl.scan_extrema
scan_extrema_python = _kernels_py.scan_extrema
