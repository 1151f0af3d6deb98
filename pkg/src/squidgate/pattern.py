"""Interference patterns, zigzag vertex geometry and 2D region maps.

The linearized model makes the critical-current envelope piecewise affine
in flux, so the pattern geometry is computed exactly: candidate vertices
are enumerated as pairwise intersections of the critical-condition lines
(plus the flux positions of vertical conditions), classified by the same
interval algebra used for point evaluation, and merged into labeled
segments.  Sampling exists only for output and plotting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import DeviceConfig
from .errors import ConfigError
from .linear import GATE_LABEL, ConstraintSet, envelope_samples

#: Jump larger than this (relative to the branch-current scale) between the
#: two one-sided envelope values at a breakpoint marks a vertical segment.
VERTICAL_JUMP_REL = 1e-9

SC, NORMAL, GATE_LIMITED = 0, 1, 2
STATE_NAMES = {SC: "superconducting", NORMAL: "normal", GATE_LIMITED: "gate-limited"}


@dataclass(frozen=True)
class Segment:
    """One affine piece of the envelope: i_c(phi) = slope * phi + intercept."""

    phi_lo: float
    phi_hi: float
    slope: float
    intercept: float
    branch_label: str
    fluxon: int

    def value(self, phi):
        return self.slope * np.asarray(phi, dtype=float) + self.intercept


@dataclass(frozen=True)
class Vertex:
    """Intersection point between two envelope pieces.

    ``vertical`` marks a finite jump (a zero-effective-inductance step):
    there ``i_left`` and ``i_right`` are the two one-sided envelope values.
    """

    phi: float
    i_left: float
    i_right: float
    labels: tuple[str, str]
    fluxons: tuple[int, int]
    vertical: bool

    @property
    def i_in(self) -> float:
        return 0.5 * (self.i_left + self.i_right)


@dataclass(frozen=True)
class InterferencePattern:
    phi: np.ndarray
    i_c: np.ndarray
    branch_labels: np.ndarray
    fluxons: np.ndarray
    vertices: tuple[Vertex, ...]
    segments: tuple[Segment, ...]
    reentrant_mask: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def phi0(self) -> float:
        return self.metadata["phi0"]

    @property
    def reentrant(self) -> bool:
        return bool(np.any(self.reentrant_mask)) or any(v.vertical for v in self.vertices)

    def span(self) -> float:
        return float(self.phi[-1] - self.phi[0])

    def segment_at(self, phi: float) -> Segment:
        for seg in self.segments:
            if seg.phi_lo - 1e-15 <= phi <= seg.phi_hi + 1e-15:
                return seg
        raise ConfigError([f"phi {phi} outside the pattern range"])


def _segment_from_constraint(cs: ConstraintSet, idx: int, m: int, lo: float, hi: float) -> Segment:
    con = cs.constraints[idx]
    offset = (cs.model.theta0 / (2.0 * math.pi)) * cs.model.phi0
    if abs(con.q) <= cs._q_eps:
        raise ConfigError(["cannot build a segment from a vertical condition"])
    slope = -con.p_g / con.q
    intercept = -(con.p0 + con.p_g * (m * cs.model.phi0 + offset)) / con.q
    return Segment(
        phi_lo=float(lo),
        phi_hi=float(hi),
        slope=float(slope),
        intercept=float(intercept),
        branch_label=con.label,
        fluxon=int(m),
    )


def _candidate_breakpoints(cs: ConstraintSet, phi_lo: float, phi_hi: float, window) -> np.ndarray:
    """Flux values where the envelope's active line can change.

    These are the pairwise intersections of all candidate lines (both
    threshold signs, both gate-current branches, the gate band) plus the
    positions of vertical conditions, for every fluxon in the window.
    """
    offset = (cs.model.theta0 / (2.0 * math.pi)) * cs.model.phi0
    phi0 = cs.model.phi0
    slopes, intercepts, verticals = [], [], []
    for con in cs.constraints:
        for m in window:
            shift = m * phi0 + offset
            if abs(con.q) <= cs._q_eps:
                if con.p_g != 0.0:
                    verticals.append(-con.p0 / con.p_g - shift)
                continue
            slopes.append(-con.p_g / con.q)
            intercepts.append(-(con.p0 + con.p_g * shift) / con.q)
    slopes = np.asarray(slopes)
    intercepts = np.asarray(intercepts)
    pts = list(verticals)
    if slopes.size:
        ds = slopes[:, None] - slopes[None, :]
        db = intercepts[None, :] - intercepts[:, None]
        iu = np.triu_indices(slopes.size, k=1)
        ds, db = ds[iu], db[iu]
        keep = np.abs(ds) > 1e-30
        pts.extend((db[keep] / ds[keep]).tolist())
    pts = np.asarray([p for p in pts if phi_lo < p < phi_hi], dtype=float)
    pts = np.concatenate([[phi_lo], np.sort(pts), [phi_hi]])
    # collapse numerically coincident breakpoints
    tol = 1e-12 * max(abs(phi_lo), abs(phi_hi), phi0)
    keep = np.concatenate([[True], np.diff(pts) > tol])
    return pts[keep]


def sweep_pattern(
    config: DeviceConfig,
    phi_range: tuple[float, float],
    n_samples: int,
    v_gate=(),
    m_halfwidth: int = 3,
    mode: str = "auto",
) -> InterferencePattern:
    """Exact interference pattern of the device over a flux range.

    ``phi_range`` must span at least one flux quantum and ``n_samples``
    at least 2.  Vertices come from exact line intersections; samples are
    evaluated with the same interval algebra and therefore lie exactly on
    the segments.
    """
    phi_lo, phi_hi = (float(phi_range[0]), float(phi_range[1]))
    if not phi_hi > phi_lo:
        raise ConfigError(["phi_range must be increasing"])
    if phi_hi - phi_lo < config.phi0 * (1.0 - 1e-12):
        raise ConfigError(["phi_range must span at least one flux quantum"])
    if n_samples < 2:
        raise ConfigError(["n_samples must be at least 2"])

    cs = ConstraintSet(config, v_gate, mode=mode)
    window = list(cs.m_window(np.array([phi_lo, phi_hi]), m_halfwidth))
    bps = _candidate_breakpoints(cs, phi_lo, phi_hi, window)

    mids = 0.5 * (bps[:-1] + bps[1:])
    env_mid = envelope_samples(cs, mids, m_halfwidth)

    # merge adjacent gaps sharing the binding (constraint, fluxon) identity
    segments: list[Segment] = []
    boundaries: list[float] = []
    run_start = 0
    identity = list(zip(env_mid.con_idx.tolist(), env_mid.fluxon.tolist(), env_mid.feasible.tolist()))
    for k in range(1, len(mids) + 1):
        if k < len(mids) and identity[k] == identity[run_start]:
            continue
        lo, hi = bps[run_start], bps[k]
        idx, m, feas = identity[run_start]
        segments.append(_segment_from_constraint(cs, idx, m, lo, hi))
        if k < len(mids):
            boundaries.append(float(bps[k]))
        run_start = k

    i_scale = max(b.critical_current for b in config.branches)
    vertices: list[Vertex] = []
    for phi_v, left, right in zip(boundaries, segments[:-1], segments[1:]):
        i_l = float(left.value(phi_v))
        i_r = float(right.value(phi_v))
        vertices.append(
            Vertex(
                phi=phi_v,
                i_left=i_l,
                i_right=i_r,
                labels=(left.branch_label, right.branch_label),
                fluxons=(left.fluxon, right.fluxon),
                vertical=abs(i_l - i_r) > VERTICAL_JUMP_REL * i_scale,
            )
        )

    phi_samples = np.linspace(phi_lo, phi_hi, int(n_samples))
    env = envelope_samples(cs, phi_samples, m_halfwidth)
    labels = np.array([cs.constraints[k].label for k in env.con_idx], dtype=object)
    labels[~env.feasible] = GATE_LABEL if config.gates else "none"

    metadata = {
        "config_digest": config.digest(),
        "v_gate": tuple(float(v) for v in np.atleast_1d(v_gate)) if len(np.atleast_1d(v_gate)) else (),
        "phi0": config.phi0,
        "mode": cs.mode,
        "i_scale": i_scale,
        "m_halfwidth": m_halfwidth,
    }
    return InterferencePattern(
        phi=phi_samples,
        i_c=env.i_c,
        branch_labels=labels,
        fluxons=env.fluxon,
        vertices=tuple(vertices),
        segments=tuple(segments),
        reentrant_mask=env.reentrant,
        metadata=metadata,
    )


@dataclass(frozen=True)
class RegionMap:
    """Ternary classification of the (phi_ext, i_in) plane.

    ``states`` is indexed [i_in, phi].  ``display_resistance`` is a
    user-supplied normal-state resistance used only for rendering.
    """

    phi: np.ndarray
    i_in: np.ndarray
    states: np.ndarray
    display_resistance: float | None = None


def region_map(
    config: DeviceConfig,
    phi_grid,
    i_in_grid,
    v_gate=(),
    m_halfwidth: int = 3,
    mode: str = "auto",
    display_resistance: float | None = None,
) -> RegionMap:
    """Classify every grid cell as superconducting, normal or gate-limited."""
    phi = np.atleast_1d(np.asarray(phi_grid, dtype=float))
    i_in = np.atleast_1d(np.asarray(i_in_grid, dtype=float))
    if phi.size == 0 or i_in.size == 0:
        raise ConfigError(["grids must be nonempty"])
    if np.any(np.diff(phi) <= 0) or np.any(np.diff(i_in) <= 0):
        raise ConfigError(["grids must be strictly increasing"])

    cs = ConstraintSet(config, v_gate, mode=mode)
    eps = 1e-12 * cs._scale

    gate_rows = cs._gate_mask
    internal = ~gate_rows
    gate_ok = np.ones(i_in.shape, dtype=bool)
    if np.any(gate_rows):
        h = (cs._p0[gate_rows, None] - eps[gate_rows, None]) + cs._q[gate_rows, None] * i_in[None, :]
        gate_ok = np.all(h > 0.0, axis=0)

    best = np.full((i_in.size, phi.size), -np.inf)
    for m in cs.m_window(phi, m_halfwidth):
        p = cs._p0[internal, None] + cs._pg[internal, None] * cs.flux_argument(phi, m)[None, :]
        h = (p[:, None, :] - eps[internal, None, None]) + cs._q[internal, None, None] * i_in[None, :, None]
        best = np.maximum(best, np.min(h / cs._scale[internal, None, None], axis=0))

    states = np.where(best > 0.0, SC, NORMAL).astype(np.uint8)
    states[~gate_ok, :] = GATE_LIMITED
    return RegionMap(phi=phi, i_in=i_in, states=states, display_resistance=display_resistance)


@dataclass(frozen=True)
class EnvelopeStats:
    max_ic: float
    min_ic: float
    modulation_depth: float


def envelope_stats(pattern: InterferencePattern, phi_start: float | None = None) -> EnvelopeStats:
    """Exact extrema of the envelope over one flux period.

    Uses the analytic segments and vertices, not the samples.  The window
    starts at ``phi_start`` (default: left edge of the pattern).
    """
    phi0 = pattern.phi0
    lo = float(pattern.phi[0]) if phi_start is None else float(phi_start)
    hi = lo + phi0
    if pattern.span() < phi0 * (1.0 - 1e-12):
        raise ConfigError(["pattern spans less than one period"])
    if hi > pattern.phi[-1] + 1e-12 * phi0:
        raise ConfigError(["period window extends past the pattern range"])

    values: list[float] = []
    for seg in pattern.segments:
        a = max(seg.phi_lo, lo)
        b = min(seg.phi_hi, hi)
        if a <= b:
            values.append(float(seg.value(a)))
            values.append(float(seg.value(b)))
    for v in pattern.vertices:
        if lo <= v.phi <= hi:
            values.extend((v.i_left, v.i_right))
    vmax, vmin = max(values), min(values)
    return EnvelopeStats(max_ic=vmax, min_ic=vmin, modulation_depth=vmax - vmin)
