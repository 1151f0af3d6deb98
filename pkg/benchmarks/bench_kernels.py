#!/usr/bin/env python3
"""Benchmark: compiled kernel vs NumPy fallback for the constraint-curve scan.

Times the raw ``scan_extrema`` kernel at several screening parameters and
a full exact-vs-linearized comparison sweep with each backend.  Both
implementations are bisection-based and bounded by libm sin() throughput
at large screening, so the compiled margin is widest at moderate beta
where its early piece rejection skips work the vectorized fallback
cannot.

Run:  python benchmarks/bench_kernels.py
"""
import time

import numpy as np

import squidgate.oracle as oracle
from squidgate import kernels
from squidgate.kernels import scan_extrema_python
from squidgate.oracle import compare_linearized, symmetric_loop


def time_call(fn, *args, repeat=30):
    fn(*args)  # warm up
    start = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - start) / repeat


def bench_raw_kernel():
    print("raw scan_extrema (ms/call, 2048-point scan)")
    print(f"{'beta':>8} {'python':>10} {'compiled':>10} {'speedup':>9}")
    for beta in (0.5, 2.0, 10.0, 100.0):
        args = (beta, beta, 1.0, 1.0, -3.7)
        t_py = time_call(scan_extrema_python, *args)
        if kernels.BACKEND == "cython":
            t_cy = time_call(kernels.scan_extrema, *args)
            print(f"{beta:8.1f} {t_py * 1e3:10.3f} {t_cy * 1e3:10.3f} {t_py / t_cy:8.1f}x")
        else:
            print(f"{beta:8.1f} {t_py * 1e3:10.3f} {'n/a':>10} {'n/a':>9}")


def bench_comparison_sweep():
    loop = symmetric_loop(20.0)
    phis = np.linspace(-0.5, 0.5, 41)

    def run_with(backend_fn):
        saved = oracle.scan_extrema
        oracle.scan_extrema = backend_fn
        try:
            start = time.perf_counter()
            report = compare_linearized(loop, phis)
            return time.perf_counter() - start, report.max_normalized_error
        finally:
            oracle.scan_extrema = saved

    print("\nfull exact-vs-linearized sweep (41 flux points, beta=20)")
    t_py, err_py = run_with(scan_extrema_python)
    print(f"  python  : {t_py:6.2f} s   max normalized error {err_py:.5f}")
    if kernels.BACKEND == "cython":
        t_cy, err_cy = run_with(kernels.scan_extrema)
        print(f"  compiled: {t_cy:6.2f} s   max normalized error {err_cy:.5f}")
        print(f"  speedup : {t_py / t_cy:.1f}x")
        assert abs(err_py - err_cy) < 1e-9
    else:
        print("  compiled backend not built; install with the Cython extension")


if __name__ == "__main__":
    print(f"active backend: {kernels.BACKEND}")
    bench_raw_kernel()
    bench_comparison_sweep()
