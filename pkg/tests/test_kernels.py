"""Backend selection and compiled-vs-fallback agreement."""
import numpy as np
import pytest

from squidgate import kernels
from squidgate.kernels import scan_extrema_python


def test_backend_identifies_itself():
    assert kernels.BACKEND in ("cython", "python")


def test_python_scan_finds_symmetric_maximum():
    found, i_max, t1, t2, i_min, *_ = scan_extrema_python(2.0, 2.0, 1.0, 1.0, 0.0)
    assert found
    assert i_max == pytest.approx(2.0, rel=1e-9)
    assert i_min == pytest.approx(-2.0, rel=1e-9)
    assert t1 == pytest.approx(np.pi / 2, abs=1e-6)
    assert t2 == pytest.approx(np.pi / 2, abs=1e-6)


def test_scan_reports_empty_window():
    # huge constraint offset pushes every root outside [0, 2pi)
    found, *_ = scan_extrema_python(0.5, 0.5, 1.0, 1.0, 1e3)
    assert not found


def test_python_scan_deterministic():
    a = scan_extrema_python(3.0, 2.0, 1.0, 1.3, -2.2)
    b = scan_extrema_python(3.0, 2.0, 1.0, 1.3, -2.2)
    assert a == b


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernel not built")
def test_compiled_matches_fallback(rng):
    from squidgate.kernels import _kernels

    for _ in range(60):
        beta1, beta2 = rng.uniform(0.2, 40.0, size=2)
        ic1, ic2 = rng.uniform(0.4, 2.5, size=2)
        k_const = rng.uniform(-25.0, 25.0)
        compiled = _kernels.scan_extrema(beta1, beta2, ic1, ic2, k_const)
        fallback = scan_extrema_python(beta1, beta2, ic1, ic2, k_const)
        assert compiled[0] == fallback[0]
        if compiled[0]:
            for x, y in zip(compiled[1:], fallback[1:]):
                assert x == pytest.approx(y, abs=1e-12)
