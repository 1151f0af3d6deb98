"""Derived physics quantities and least-squares parameter fitting.

Phase shifts are flux translations of the interference pattern; amplitude
shifts are translations along the current axis.  Fitting minimizes the
RMS mismatch between a model envelope and sampled data with a bounded
derivative-free simplex (the envelope is piecewise affine, so gradients
are discontinuous at vertices) restarted from a deterministic set of
initial points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .circuit import DeviceConfig
from .errors import ConfigError, SolverError
from .linear import critical_current_grid
from .pattern import InterferencePattern

#: Segments steeper than i_scale / (epsilon * phi0) count as zero-inductance.
ZERO_INDUCTANCE_EPS = 1e-6


def _single_gate(config: DeviceConfig):
    if len(config.gates) != 1:
        raise ConfigError(["operation needs exactly one gate"])
    return config.gates[0]


def _gate_branch_inductance(config: DeviceConfig) -> float:
    """Inductance of the branch just downstream of the gate node."""
    gate = _single_gate(config)
    return config.branches[gate.node].inductance


def phase_shift_predicted(config: DeviceConfig, v_gate: float) -> float:
    """Flux translation of the pattern induced by a gate voltage.

    In the wide-gate regime (binding branches on either side of the gated
    arm) the whole pattern translates by L_gate * v / (r_gate + r_out)
    along the flux axis; the equivalent loop-phase shift is
    -2*pi*shift/phi0.
    """
    gate = _single_gate(config)
    return _gate_branch_inductance(config) * v_gate / (gate.r_gate + gate.r_out)


def phase_shift_radians(config: DeviceConfig, v_gate: float) -> float:
    """Loop-phase equivalent of ``phase_shift_predicted`` (sign included)."""
    return -2.0 * math.pi * phase_shift_predicted(config, v_gate) / config.phi0


def phase_shift_measured(
    pattern_a: InterferencePattern,
    pattern_b: InterferencePattern,
    n_scan: int = 1600,
) -> float:
    """Flux translation best aligning two sampled patterns.

    Returns the shift d in (-phi0/2, phi0/2] minimizing the RMS of
    ``pattern_b(phi) - pattern_a(phi - d)`` over one central period, i.e.
    how far pattern_b is displaced relative to pattern_a.  Both patterns
    must be sampled on the same grid and span at least two periods.
    """
    phi0 = pattern_a.phi0
    if abs(phi0 - pattern_b.phi0) > 1e-12 * phi0:
        raise ConfigError(["patterns with different periods cannot be aligned"])
    if pattern_a.phi.shape != pattern_b.phi.shape or not np.allclose(
        pattern_a.phi, pattern_b.phi, rtol=0.0, atol=1e-12 * phi0
    ):
        raise ConfigError(["patterns must share one flux grid"])
    for pat in (pattern_a, pattern_b):
        if pat.span() < 2.0 * phi0 * (1.0 - 1e-9):
            raise ConfigError(["patterns must span at least two periods"])

    phi = pattern_a.phi
    center = 0.5 * (phi[0] + phi[-1])
    window = np.linspace(center - 0.5 * phi0, center + 0.5 * phi0, 512)
    b_window = np.interp(window, phi, pattern_b.i_c)

    def mismatch(delta: float) -> float:
        a_shifted = np.interp(window - delta, phi, pattern_a.i_c)
        return float(np.sqrt(np.mean((b_window - a_shifted) ** 2)))

    deltas = np.linspace(-0.5 * phi0, 0.5 * phi0, n_scan, endpoint=True)
    costs = np.array([mismatch(d) for d in deltas])
    k = int(np.argmin(costs))
    lo = deltas[max(k - 2, 0)]
    hi = deltas[min(k + 2, n_scan - 1)]
    res = minimize_scalar(mismatch, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-7 * phi0})
    best = float(res.x) if res.fun <= costs[k] else float(deltas[k])
    if best <= -0.5 * phi0:
        best += phi0
    return best


def amplitude_shift_predicted(config: DeviceConfig, v_gate: float) -> float:
    """Downward shift of the envelope along the current axis,
    (v/r_gate) * (1 + alpha) / (1 - alpha*r)."""
    gate = _single_gate(config)
    alpha = gate.coupling_alpha
    r = gate.r_out / gate.r_gate
    if abs(1.0 - alpha * r) < 1e-12:
        raise SolverError(
            "amplitude shift is singular at alpha * r == 1",
            alpha=alpha,
            resistance_ratio=r,
        )
    return (v_gate / gate.r_gate) * (1.0 + alpha) / (1.0 - alpha * r)


def envelope_extrema_predicted(config: DeviceConfig, v_gate: float) -> tuple[float, float]:
    """Closed-form (max, min) of the narrow-gate envelope over one period.

    Valid in the amplitude-shift regime where the gated-arm and return
    branches set the zigzag (positive gate current along the envelope) and
    all branches share one bare threshold.
    """
    gate = _single_gate(config)
    ics = {b.critical_current for b in config.branches}
    if len(ics) != 1:
        raise ConfigError(["closed-form envelope extrema need equal thresholds"])
    i_star = ics.pop()
    alpha = gate.coupling_alpha
    s = gate.r_gate + gate.r_out
    d = sum(b.inductance for b in config.branches)
    denom = gate.r_gate - alpha * gate.r_out
    if abs(denom) < 1e-15 * s:
        raise SolverError("envelope extrema singular at alpha * r == 1", alpha=alpha)
    vmax = ((1.0 + alpha) * v_gate - 2.0 * s * i_star) / (alpha * gate.r_out - gate.r_gate)
    vmin = vmax - s * config.phi0 / (d * denom)
    return vmax, vmin


@dataclass(frozen=True)
class EffectiveInductance:
    """Reciprocal envelope slope at one flux point (signed, henry)."""

    l_left: float
    l_right: float
    at_vertex: bool
    zero_inductance: bool

    @property
    def value(self) -> float:
        return self.l_left if not self.at_vertex else math.nan

    @property
    def infinite(self) -> bool:
        return math.isinf(self.l_left) or math.isinf(self.l_right)


def effective_inductance(
    pattern: InterferencePattern, phi: float, epsilon: float = ZERO_INDUCTANCE_EPS
) -> EffectiveInductance:
    """Effective inductance (dI_c/dphi)^-1 of the envelope at ``phi``.

    Inside a segment both one-sided values coincide; at a vertex they are
    the two adjacent segment values.  Slopes steeper than
    i_scale/(epsilon*phi0), and vertical jumps, are flagged zero-inductance;
    flat segments report an infinite inductance.
    """
    phi0 = pattern.phi0
    i_scale = pattern.metadata.get("i_scale", 1.0)
    slope_cut = i_scale / (epsilon * phi0)
    vertex_tol = 1e-9 * phi0

    def reciprocal(slope: float) -> float:
        if slope == 0.0:
            return math.inf
        return 1.0 / slope

    for v in pattern.vertices:
        if abs(phi - v.phi) <= vertex_tol:
            left = right = None
            for seg in pattern.segments:
                if abs(seg.phi_hi - v.phi) <= vertex_tol:
                    left = seg
                if abs(seg.phi_lo - v.phi) <= vertex_tol:
                    right = seg
            l_left = reciprocal(left.slope) if left else math.nan
            l_right = reciprocal(right.slope) if right else math.nan
            zero = v.vertical or any(
                abs(s.slope) > slope_cut for s in (left, right) if s is not None
            )
            return EffectiveInductance(
                l_left=l_left, l_right=l_right, at_vertex=True, zero_inductance=zero
            )

    seg = pattern.segment_at(phi)
    l_val = reciprocal(seg.slope)
    return EffectiveInductance(
        l_left=l_val,
        l_right=l_val,
        at_vertex=False,
        zero_inductance=abs(seg.slope) > slope_cut,
    )


def alpha_star(config: DeviceConfig) -> float:
    """Coupling strength at which the envelope acquires a vertical segment.

    Solves l3 - (l1 + alpha * sum(L)) * r = 0 for the canonical
    three-branch loop; negative values indicate the vertical segment is
    unreachable for any physical coupling.
    """
    gate = _single_gate(config)
    if config.n_branches != 3:
        raise ConfigError(["alpha_star covers the three-branch loop"])
    l1, _, l3 = (b.inductance for b in config.branches)
    r = gate.r_out / gate.r_gate
    total = sum(b.inductance for b in config.branches)
    return (l3 / r - l1) / total


# ---------------------------------------------------------------------------
# Least-squares parameter fitting
# ---------------------------------------------------------------------------

_BRANCH_L = "L"
_BRANCH_I = "I"
_GATE_FIELDS = {"alpha": "coupling_alpha", "r_gate": "r_gate",
                "r_out": "r_out", "gate_threshold": "gate_threshold"}


def apply_parameters(config: DeviceConfig, names, values) -> DeviceConfig:
    """Return a copy of ``config`` with the named parameters replaced.

    Names: ``L1..LN`` (inductances), ``I1..IN`` (thresholds), ``theta0``,
    and single-gate fields ``alpha``, ``r_gate``, ``r_out``,
    ``gate_threshold``.
    """
    branches = list(config.branches)
    gates = list(config.gates)
    theta0 = config.theta0
    for name, value in zip(names, values):
        value = float(value)
        if name == "theta0":
            theta0 = value
        elif name in _GATE_FIELDS:
            if len(gates) != 1:
                raise ConfigError([f"parameter {name} needs a single-gate device"])
            gates[0] = replace(gates[0], **{_GATE_FIELDS[name]: value})
        elif name[:1] in (_BRANCH_L, _BRANCH_I) and name[1:].isdigit():
            idx = int(name[1:]) - 1
            if not 0 <= idx < len(branches):
                raise ConfigError([f"parameter {name} references a missing branch"])
            field = "inductance" if name[0] == _BRANCH_L else "critical_current"
            branches[idx] = replace(branches[idx], **{field: value})
        else:
            raise ConfigError([f"unknown fit parameter {name!r}"])
    return replace(config, branches=tuple(branches), gates=tuple(gates), theta0=theta0)


@dataclass(frozen=True)
class FitResult:
    params: dict
    rms: float
    iterations: int
    converged: bool
    bounds: dict
    n_starts: int
    best_start: int
    history: tuple[float, ...]


def _as_curves(data):
    curves = []
    for item in data:
        phi, ic, v_gate = item
        v = (float(v_gate),) if np.isscalar(v_gate) else tuple(float(x) for x in v_gate)
        curves.append((np.asarray(phi, dtype=float), np.asarray(ic, dtype=float), v))
    return curves


def fit_parameters(
    data,
    config_template: DeviceConfig,
    free_params,
    bounds: dict,
    seed: int = 0,
    n_starts: int = 8,
    m_halfwidth: int = 3,
    mode: str = "auto",
    max_iter: int = 600,
) -> FitResult:
    """Fit named device parameters to sampled critical-current curves.

    ``data`` is a sequence of ``(phi, i_c, v_gate)`` curves, each spanning
    at least two flux periods.  The objective is the RMS of model minus
    data over all points, excluding flux points the model flags as
    re-entrant.  A bounded Nelder-Mead simplex runs from ``n_starts``
    deterministic initial points (template values first, then uniform
    draws from the bound box with the given seed); ties in final RMS
    resolve to the lowest start index.
    """
    free_params = list(free_params)
    if not free_params:
        raise ConfigError(["free_params must name at least one parameter"])
    missing = [p for p in free_params if p not in bounds]
    if missing:
        raise ConfigError([f"missing bounds for {p}" for p in missing])
    curves = _as_curves(data)
    if not curves:
        raise ConfigError(["no data curves supplied"])
    all_ic = np.concatenate([ic for _, ic, _ in curves])
    if np.std(all_ic) < 1e-12 * max(1.0, float(np.max(np.abs(all_ic)))):
        raise ConfigError(["unidentifiable: critical-current data is constant"])
    for phi, ic, _ in curves:
        if phi.shape != ic.shape or phi.size < 4:
            raise ConfigError(["each curve needs matching phi/i_c arrays"])
        if phi[-1] - phi[0] < 2.0 * config_template.phi0 * (1.0 - 1e-9):
            raise ConfigError(["each curve must span at least two periods"])

    box = [(float(bounds[p][0]), float(bounds[p][1])) for p in free_params]
    widths = np.array([hi - lo for lo, hi in box])
    if np.any(widths <= 0):
        raise ConfigError(["bounds must have positive width"])

    def objective(x) -> float:
        try:
            cfg = apply_parameters(config_template, free_params, x)
        except ConfigError:
            return 1e300
        total, count = 0.0, 0
        for phi, ic, v in curves:
            model, _, _, reentrant = critical_current_grid(
                cfg, phi, v, m_halfwidth=m_halfwidth, mode=mode
            )
            keep = ~reentrant & np.isfinite(model)
            if not np.any(keep):
                return 1e300
            total += float(np.sum((model[keep] - ic[keep]) ** 2))
            count += int(np.sum(keep))
        return math.sqrt(total / count)

    rng = np.random.default_rng(seed)
    template_values = _template_values(config_template, free_params)
    starts = [np.clip(template_values, [lo for lo, _ in box], [hi for _, hi in box])]
    for _ in range(n_starts - 1):
        starts.append(np.array([rng.uniform(lo, hi) for lo, hi in box]))

    best = None
    for start_idx, x0 in enumerate(starts):
        history: list[float] = []

        def track(xk):
            history.append(objective(xk))

        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=box,
            callback=track,
            options={
                "maxiter": max_iter,
                "xatol": 1e-10 * float(np.max(widths)),
                "fatol": 1e-14,
                "adaptive": False,
            },
        )
        diam = _simplex_diameter(res, widths)
        record = (float(res.fun), start_idx, res, tuple(history), diam)
        if best is None or record[:2] < best[:2]:
            best = record

    rms, best_start, res, history, diam = best
    params = {p: float(v) for p, v in zip(free_params, res.x)}
    return FitResult(
        params=params,
        rms=rms,
        iterations=int(res.nit),
        converged=bool(diam < 1e-6),
        bounds={p: tuple(map(float, bounds[p])) for p in free_params},
        n_starts=n_starts,
        best_start=best_start,
        history=history,
    )


def _template_values(config: DeviceConfig, names) -> np.ndarray:
    out = []
    for name in names:
        if name == "theta0":
            out.append(config.resolved_theta0())
        elif name in _GATE_FIELDS:
            out.append(getattr(config.gates[0], _GATE_FIELDS[name]))
        elif name[:1] == _BRANCH_L and name[1:].isdigit():
            out.append(config.branches[int(name[1:]) - 1].inductance)
        elif name[:1] == _BRANCH_I and name[1:].isdigit():
            out.append(config.branches[int(name[1:]) - 1].critical_current)
        else:
            raise ConfigError([f"unknown fit parameter {name!r}"])
    return np.array(out, dtype=float)


def _simplex_diameter(res, widths) -> float:
    simplex = getattr(res, "final_simplex", None)
    if simplex is None:
        return math.inf
    verts = np.asarray(simplex[0], dtype=float)
    spread = np.max(verts, axis=0) - np.min(verts, axis=0)
    return float(np.max(spread / widths))
