"""Exact nonlinear solver for a two-junction DC-SQUID.

This is the validation oracle for the linearized model: a loop of two
sinusoidal weak links whose critical current is found by maximizing the
total current over the full nonlinear quantization constraint

    t1 - t2 + beta1*sin(t1) - beta2*sin(t2) - 2*pi*(phi/phi0 + m) = 0

with t1, t2 in [0, 2pi) and the fluxon index m scanned over a window.
Branch 2 is traversed against the loop orientation, which is what makes
the symmetric zero-flux optimum land exactly at i_c = ic1 + ic2.

Stability of a reported optimum uses the local-maximum-along-the-curve
criterion (checked by central differences); the full energy-landscape
analysis is intentionally out of scope.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SolverError
from .kernels import scan_extrema
from .kernels._kernels_py import _pieces, _root_in_piece

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class TwoJunctionLoop:
    """Two parallel sinusoidal weak links closing one superconducting loop."""

    l1: float
    l2: float
    ic1: float
    ic2: float
    phi0: float = 1.0

    def __post_init__(self):
        bad = [
            name
            for name, val in (
                ("l1", self.l1),
                ("l2", self.l2),
                ("ic1", self.ic1),
                ("ic2", self.ic2),
                ("phi0", self.phi0),
            )
            if not (val > 0.0 and math.isfinite(val))
        ]
        if bad:
            raise ConfigError([f"{name} must be positive" for name in bad])

    @property
    def beta1(self) -> float:
        return 2.0 * math.pi * self.l1 * self.ic1 / self.phi0

    @property
    def beta2(self) -> float:
        return 2.0 * math.pi * self.l2 * self.ic2 / self.phi0


def symmetric_loop(beta_l: float, ic: float = 1.0, phi0: float = 1.0) -> TwoJunctionLoop:
    """Symmetric loop with a given per-branch screening parameter."""
    l = beta_l * phi0 / (2.0 * math.pi * ic)
    return TwoJunctionLoop(l1=l, l2=l, ic1=ic, ic2=ic, phi0=phi0)


@dataclass(frozen=True)
class ExactCritical:
    i_c: float
    theta1: float
    theta2: float
    fluxon: int
    residual: float
    stable: bool


def _k_const(loop: TwoJunctionLoop, phi_ext: float, m: int) -> float:
    return -2.0 * math.pi * (phi_ext / loop.phi0 + m)


def constraint_residual(loop: TwoJunctionLoop, t1: float, t2: float, phi_ext: float, m: int) -> float:
    return abs(
        t1
        - t2
        + loop.beta1 * math.sin(t1)
        - loop.beta2 * math.sin(t2)
        + _k_const(loop, phi_ext, m)
    )


def _curve_value(loop: TwoJunctionLoop, t1: float, t2_near: float, phi_ext: float, m: int):
    """Total current at t1 with t2 continued within its monotone piece."""
    w = t1 + loop.beta1 * math.sin(t1) + _k_const(loop, phi_ext, m)
    for lo, hi in _pieces(loop.beta2):
        if lo - 1e-9 <= t2_near <= hi + 1e-9:
            t2 = _root_in_piece(w, lo, hi, loop.beta2)
            if t2 is not None:
                return loop.ic1 * math.sin(t1) + loop.ic2 * math.sin(t2)
            return None
    return None


def _is_local_max(loop, t1, t2, phi_ext, m, value, h=1e-5) -> bool:
    left = _curve_value(loop, t1 - h, t2, phi_ext, m)
    right = _curve_value(loop, t1 + h, t2, phi_ext, m)
    if left is None or right is None:
        return True  # sheet edge (fold): treated as a stable boundary point
    return left <= value + 1e-12 and right <= value + 1e-12


def exact_critical_current(
    loop: TwoJunctionLoop,
    phi_ext: float,
    m_halfwidth: int = 3,
    n_theta: int = 2048,
) -> ExactCritical:
    """Global maximum of the carried current over the fluxon window."""
    m0 = round(-phi_ext / loop.phi0)
    best = None
    for m in range(m0 - m_halfwidth, m0 + m_halfwidth + 1):
        found, i_max, t1, t2, _, _, _ = scan_extrema(
            loop.beta1, loop.beta2, loop.ic1, loop.ic2, _k_const(loop, phi_ext, m), n_theta
        )
        if not found:
            continue
        if best is None or i_max > best[0]:
            best = (i_max, t1, t2, m)
    if best is None:
        raise SolverError(
            "no constraint solution in the fluxon window",
            phi_ext=phi_ext,
            m_window=(m0 - m_halfwidth, m0 + m_halfwidth),
        )
    i_max, t1, t2, m = best
    residual = constraint_residual(loop, t1, t2, phi_ext, m)
    if residual > RESIDUAL_TOL:
        raise SolverError(
            "constraint root did not converge",
            theta1=t1,
            fluxon=m,
            residual=residual,
        )
    stable = _is_local_max(loop, t1, t2, phi_ext, m, i_max)
    return ExactCritical(
        i_c=float(i_max),
        theta1=float(t1),
        theta2=float(t2),
        fluxon=int(m),
        residual=float(residual),
        stable=bool(stable),
    )


@dataclass(frozen=True)
class StabilityRegion:
    """Boundary of the stable region of one fluxon index in (phi, i_in)."""

    fluxon: int
    phi: np.ndarray
    i_upper: np.ndarray
    i_lower: np.ndarray
    exists: np.ndarray


def stability_region(loop: TwoJunctionLoop, m: int, phi_values) -> StabilityRegion:
    """Per-flux extremes of the current carried stably at fluxon index m."""
    phi = np.atleast_1d(np.asarray(phi_values, dtype=float))
    upper = np.full(phi.shape, np.nan)
    lower = np.full(phi.shape, np.nan)
    exists = np.zeros(phi.shape, dtype=bool)
    for j, p in enumerate(phi):
        found, i_max, _, _, i_min, _, _ = scan_extrema(
            loop.beta1, loop.beta2, loop.ic1, loop.ic2, _k_const(loop, float(p), m)
        )
        if found:
            exists[j] = True
            upper[j] = i_max
            lower[j] = i_min
    return StabilityRegion(fluxon=int(m), phi=phi, i_upper=upper, i_lower=lower, exists=exists)


def linearized_two_junction_ic(
    loop: TwoJunctionLoop, phi_ext, m_halfwidth: int = 3
):
    """Zigzag critical current of the loop under the linear quantization rule.

    With both junctions pinned near their maxima the constraint reduces to
    l1*i1 - l2*i2 = m*phi0 + phi_ext, giving one rising and one falling
    line per fluxon; the envelope is the max over m of their minimum.
    """
    phi = np.atleast_1d(np.asarray(phi_ext, dtype=float))
    center = (loop.l1 * loop.ic1 - loop.l2 * loop.ic2 - phi) / loop.phi0
    m0 = np.round(center)
    best = np.full(phi.shape, -np.inf)
    for dm in range(-m_halfwidth, m_halfwidth + 1):
        m = m0 + dm
        arg = m * loop.phi0 + phi
        line_a = loop.ic1 + (loop.l1 * loop.ic1 - arg) / loop.l2
        line_b = loop.ic2 + (loop.l2 * loop.ic2 + arg) / loop.l1
        best = np.maximum(best, np.minimum(line_a, line_b))
    return best if np.ndim(phi_ext) else float(best[0])


@dataclass(frozen=True)
class LinearizedComparison:
    phi: np.ndarray
    i_c_exact: np.ndarray
    i_c_linear: np.ndarray
    max_abs_error: float
    mean_abs_error: float
    current_scale: float

    @property
    def max_normalized_error(self) -> float:
        return self.max_abs_error / self.current_scale

    @property
    def mean_normalized_error(self) -> float:
        return self.mean_abs_error / self.current_scale


def compare_linearized(
    loop: TwoJunctionLoop,
    phi_samples,
    m_halfwidth: int = 3,
    n_theta: int = 2048,
) -> LinearizedComparison:
    """Exact-versus-linearized critical current on given flux samples."""
    phi = np.atleast_1d(np.asarray(phi_samples, dtype=float))
    exact = np.array(
        [exact_critical_current(loop, float(p), m_halfwidth, n_theta).i_c for p in phi]
    )
    linear = np.asarray(linearized_two_junction_ic(loop, phi, m_halfwidth))
    err = np.abs(exact - linear)
    scale = 0.5 * (loop.ic1 + loop.ic2)
    return LinearizedComparison(
        phi=phi,
        i_c_exact=exact,
        i_c_linear=linear,
        max_abs_error=float(np.max(err)),
        mean_abs_error=float(np.mean(err)),
        current_scale=scale,
    )
