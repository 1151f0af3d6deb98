"""Linearized network solver for gated SQUID loops.

The loop quantization rule used throughout is linear in the branch
currents:

    sum_i L_i * I_i = (m + theta0 / 2pi) * phi0 + phi_ext

so every solved current is an affine function of the drive
(i_in, v_gate, phi_ext) and of the fluxon index m.  The
superconducting-normal boundary is then a family of straight lines in the
(phi_ext, i_in) plane, one per branch threshold condition and fluxon
index, and the device critical current is the upper envelope of the
per-fluxon feasible intervals.

Sign conventions follow the ring layout of :mod:`squidgate.circuit`:
``i_in = I_1 - I_N`` at the input node and, for the canonical three-branch
device, ``i_gate = I_2 - I_1`` at the gate node.  Branches on the return
arm carry negative current under positive bias, so their binding
threshold is the negative one.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .circuit import DeviceConfig, Drive, validate_drive
from .errors import ConfigError, SolverError

#: Equality at a threshold within this relative margin classifies as normal.
TIE_EPS_REL = 1e-12

#: Relative cutoff below which a constraint's i_in coefficient is treated
#: as exactly zero (a "vertical line" in the (phi_ext, i_in) plane).
VERTICAL_Q_REL = 1e-12

GATE_LABEL = "gate"


# ---------------------------------------------------------------------------
# Affine current model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineModel:
    """Branch and gate currents as affine maps of the external drive.

    ``I = c * i_in + e * G + f @ v_gate`` with
    ``G = (m + theta0/2pi) * phi0 + phi_ext``, and
    ``I_gate_k = gate_c[k] * i_in + gate_f[k] @ v_gate``.
    """

    c: np.ndarray
    e: np.ndarray
    f: np.ndarray
    gate_c: np.ndarray
    gate_f: np.ndarray
    theta0: float
    phi0: float

    def flux_argument(self, phi_ext, m) -> np.ndarray | float:
        return (np.asarray(m, dtype=float) + self.theta0 / (2.0 * math.pi)) * self.phi0 + phi_ext

    def currents(self, i_in, phi_ext, m, v_gate=()):
        v = np.asarray(v_gate, dtype=float)
        g = self.flux_argument(phi_ext, m)
        contrib = self.f @ v if v.size else 0.0
        return self.c * i_in + self.e * g + contrib

    def gate_currents(self, i_in, v_gate=()):
        v = np.asarray(v_gate, dtype=float)
        if self.gate_c.size == 0:
            return np.zeros(0)
        return self.gate_c * i_in + self.gate_f @ v


def _gate_coefficients(config: DeviceConfig):
    """Resistive closure of the gate network.

    All superconducting nodes sit at the output potential V0, so each gate
    current is set by its source voltage, its series resistor and V0,
    with current conservation i_in + sum(I_gate) = I_out = V0 / r_out.
    """
    n_g = len(config.gates)
    if n_g == 0:
        return np.zeros(0), np.zeros((0, 0))
    r_out = config.gates[0].r_out
    r_g = np.array([g.r_gate for g in config.gates])
    r_parallel = 1.0 / (1.0 / r_out + np.sum(1.0 / r_g))
    # V0 = r_parallel * (i_in + sum_j v_j / r_j)
    gate_c = -r_parallel / r_g
    gate_f = (np.eye(n_g) - r_parallel / r_g[None, :]) / r_g[:, None]
    return gate_c, gate_f


def affine_model(config: DeviceConfig) -> AffineModel:
    """Assemble and solve the Kirchhoff + quantization system symbolically.

    The system has one current-law row per node except the output node
    (whose balance is implied by conservation) plus the linear
    quantization row, making it square in the branch currents.
    """
    n = config.n_branches
    out_node = config.resolved_output_node()
    gate_c, gate_f = _gate_coefficients(config)
    n_g = len(config.gates)

    matrix = np.zeros((n, n))
    rhs_iin = np.zeros(n)
    rhs_g = np.zeros(n)
    rhs_v = np.zeros((n, n_g))
    row = 0
    row_names = []
    for node in range(n):
        if node == out_node:
            continue
        # branch (node-1) mod n flows in, branch node flows out
        matrix[row, (node - 1) % n] += 1.0
        matrix[row, node] += -1.0
        if node == config.input_node:
            rhs_iin[row] -= 1.0
        for k, g in enumerate(config.gates):
            if g.node == node:
                rhs_iin[row] -= gate_c[k]
                rhs_v[row] -= gate_f[k]
        row_names.append(f"current law at node {node}")
        row += 1
    matrix[row] = [b.inductance for b in config.branches]
    rhs_g[row] = 1.0
    row_names.append("loop quantization")

    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > 1e12:
        raise SolverError(
            "singular circuit system: degenerate topology",
            equations=row_names,
            condition_number=float(cond),
        )
    sol = np.linalg.solve(matrix, np.column_stack([rhs_iin, rhs_g, rhs_v]))
    return AffineModel(
        c=sol[:, 0].copy(),
        e=sol[:, 1].copy(),
        f=sol[:, 2:].copy(),
        gate_c=gate_c,
        gate_f=gate_f,
        theta0=config.resolved_theta0(),
        phi0=config.phi0,
    )


# ---------------------------------------------------------------------------
# Branch states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchState:
    """Solved internal currents for one drive point and fluxon index."""

    currents: tuple[float, ...]
    gate_currents: tuple[float, ...]
    fluxon: int
    fulton_phases: tuple[float, ...]


def _state_from_currents(config: DeviceConfig, currents, gate_currents, m: int) -> BranchState:
    phases = tuple(
        (math.pi / 2.0) * (1.0 if cur >= 0.0 else -1.0)
        + (2.0 * math.pi / config.phi0) * b.inductance * cur
        for b, cur in zip(config.branches, currents)
    )
    return BranchState(
        currents=tuple(float(x) for x in currents),
        gate_currents=tuple(float(x) for x in gate_currents),
        fluxon=int(m),
        fulton_phases=phases,
    )


def state_residuals(config: DeviceConfig, drive: Drive, state: BranchState):
    """(max Kirchhoff residual, quantization residual in radians)."""
    n = config.n_branches
    cur = state.currents
    out_node = config.resolved_output_node()
    i_out = drive.i_in + sum(state.gate_currents)
    worst = 0.0
    for node in range(n):
        inj = 0.0
        if node == config.input_node:
            inj += drive.i_in
        for k, g in enumerate(config.gates):
            if g.node == node:
                inj += state.gate_currents[k]
        if node == out_node:
            inj -= i_out
        worst = max(worst, abs(cur[(node - 1) % n] - cur[node] + inj))
    model = affine_model(config)
    g_val = model.flux_argument(drive.phi_ext, state.fluxon)
    flux_sum = sum(b.inductance * c for b, c in zip(config.branches, cur))
    quant = (2.0 * math.pi / config.phi0) * abs(flux_sum - g_val)
    return worst, quant


def gate_current(config: DeviceConfig, drive: Drive) -> float:
    """Gate current of a single-gate device:
    (v_gate - r_out * i_in) / (r_gate + r_out)."""
    if len(config.gates) != 1:
        raise ConfigError(["gate_current needs exactly one gate"])
    validate_drive(config, drive)
    g = config.gates[0]
    return (drive.v_gate[0] - g.r_out * drive.i_in) / (g.r_gate + g.r_out)


def gate_critical_input(config: DeviceConfig, v_gate: float) -> float:
    """Nominal gate-imposed input bound
    (v_gate - i_gate_threshold * r_out) / (r_gate + r_out).

    This is the conventional reported bound; the solver itself enforces
    the full two-sided band |i_gate| < threshold (``gate_input_bounds``),
    of which this expression is a one-sided surrogate.
    """
    if len(config.gates) != 1:
        raise ConfigError(["gate_critical_input needs exactly one gate"])
    g = config.gates[0]
    return (v_gate - g.gate_threshold * g.r_out) / (g.r_gate + g.r_out)


def gate_input_bounds(config: DeviceConfig, v_gate: float) -> tuple[float, float]:
    """Open interval of input currents keeping |i_gate| < threshold."""
    if len(config.gates) != 1:
        raise ConfigError(["gate_input_bounds needs exactly one gate"])
    g = config.gates[0]
    s = g.r_gate + g.r_out
    lo = (v_gate - s * g.gate_threshold) / g.r_out
    hi = (v_gate + s * g.gate_threshold) / g.r_out
    return lo, hi


def internal_currents_closed(config: DeviceConfig, drive: Drive, m: int) -> BranchState:
    """Closed-form branch currents of the three-branch single-gate loop.

    Kept as an independent expression of the same algebra that
    ``internal_currents_generic`` assembles numerically; the two must
    agree to rounding error on any valid device.
    """
    if config.n_branches != 3 or len(config.gates) != 1:
        raise ConfigError(["closed form covers 3-branch single-gate devices only"])
    if config.gates[0].node != 1 or config.input_node != 0 or config.resolved_output_node() != 2:
        raise ConfigError(["closed form assumes gate at node 1, input 0, output 2"])
    validate_drive(config, drive)
    l1, l2, l3 = (b.inductance for b in config.branches)
    g = config.gates[0]
    s = g.r_gate + g.r_out
    d = l1 + l2 + l3
    theta0 = config.resolved_theta0()
    g_val = (m + theta0 / (2.0 * math.pi)) * config.phi0 + drive.phi_ext
    v_g = drive.v_gate[0]
    i_in = drive.i_in
    i1 = (l2 * (-v_g + g.r_out * i_in) + s * (l3 * i_in + g_val)) / (d * s)
    i2 = (l3 * (v_g + g.r_gate * i_in) + l1 * (v_g - g.r_out * i_in) + s * g_val) / (d * s)
    i3 = -(l2 * (v_g + g.r_gate * i_in) + s * (l1 * i_in - g_val)) / (d * s)
    i_gate = (v_g - g.r_out * i_in) / s
    return _state_from_currents(config, (i1, i2, i3), (i_gate,), m)


def internal_currents_generic(config: DeviceConfig, drive: Drive, m: int) -> BranchState:
    """Branch currents for any ring device with any number of gates."""
    validate_drive(config, drive)
    model = affine_model(config)
    currents = model.currents(drive.i_in, drive.phi_ext, m, drive.v_gate)
    gates = model.gate_currents(drive.i_in, drive.v_gate)
    return _state_from_currents(config, currents, gates, m)


# ---------------------------------------------------------------------------
# Threshold constraints and the critical-current envelope
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    """One affine feasibility condition h(i_in, G) = p0 + p_g*G + q*i_in > 0."""

    kind: str                 # "branch" or "gate"
    branch: int | None        # 1-based branch index
    gate: int | None          # 0-based gate index
    side: int                 # threshold sign being enforced
    gate_signs: tuple[int, ...]  # sign branch of each coupled |i_gate|
    p0: float
    p_g: float
    q: float
    scale: float              # threshold magnitude, for tie tolerances

    @property
    def label(self) -> str:
        return GATE_LABEL if self.kind == "gate" else str(self.branch)


class ConstraintSet:
    """All threshold conditions of a device at fixed gate voltages.

    ``mode`` selects the threshold law for branches adjacent to a gate:
    ``"wide"`` keeps bare thresholds, ``"narrow"`` suppresses them by
    alpha * |i_gate|, and ``"auto"`` picks narrow when any gate carries
    alpha > 0.  The |i_gate| kinks are unfolded into one affine condition
    per sign combination, keeping every condition affine in i_in.
    """

    def __init__(self, config: DeviceConfig, v_gate=(), mode: str = "auto"):
        if mode not in ("auto", "wide", "narrow"):
            raise ConfigError([f"unknown mode {mode!r}"])
        v = tuple(float(x) for x in v_gate)
        if len(v) != len(config.gates):
            raise ConfigError(
                [f"{len(v)} gate voltages supplied for {len(config.gates)} gates"]
            )
        self.config = config
        self.v_gate = v
        self.model = affine_model(config)
        if mode == "auto":
            mode = "narrow" if any(g.coupling_alpha > 0 for g in config.gates) else "wide"
        self.mode = mode

        model = self.model
        n = config.n_branches
        v_arr = np.asarray(v, dtype=float)
        gate_u0 = model.gate_f @ v_arr if len(v) else np.zeros(0)
        gate_u1 = model.gate_c
        f_dot_v = model.f @ v_arr if len(v) else np.zeros(n)

        # map branch -> coupled gates (gate at node k touches branches k and k+1)
        adjacency: dict[int, list[int]] = {i + 1: [] for i in range(n)}
        if mode == "narrow":
            for k, g in enumerate(config.gates):
                adjacency[g.node].append(k)
                adjacency[g.node + 1 if g.node + 1 <= n else 1].append(k)

        cons: list[Constraint] = []
        for b in config.branches:
            i = b.index
            idx = i - 1
            gates_here = adjacency[i] if mode == "narrow" else []
            sign_choices = (
                list(itertools.product((1, -1), repeat=len(gates_here)))
                if gates_here
                else [()]
            )
            for side in (1, -1):
                for sigma in sign_choices:
                    p0 = b.critical_current - side * f_dot_v[idx]
                    p_g = -side * model.e[idx]
                    q = -side * model.c[idx]
                    for sg, k in zip(sigma, gates_here):
                        alpha = config.gates[k].coupling_alpha
                        p0 -= alpha * sg * gate_u0[k]
                        q -= alpha * sg * gate_u1[k]
                    cons.append(
                        Constraint(
                            kind="branch",
                            branch=i,
                            gate=None,
                            side=side,
                            gate_signs=tuple(sigma),
                            p0=float(p0),
                            p_g=float(p_g),
                            q=float(q),
                            scale=b.critical_current,
                        )
                    )
        for k, g in enumerate(config.gates):
            for sg in (1, -1):
                cons.append(
                    Constraint(
                        kind="gate",
                        branch=None,
                        gate=k,
                        side=sg,
                        gate_signs=(sg,),
                        p0=float(g.gate_threshold - sg * gate_u0[k]),
                        p_g=0.0,
                        q=float(-sg * gate_u1[k]),
                        scale=g.gate_threshold,
                    )
                )
        self.constraints = tuple(cons)
        self._p0 = np.array([c.p0 for c in cons])
        self._pg = np.array([c.p_g for c in cons])
        self._q = np.array([c.q for c in cons])
        self._scale = np.array([c.scale for c in cons])
        q_ref = max(np.max(np.abs(model.c)), np.max(np.abs(gate_u1)) if gate_u1.size else 0.0)
        self._q_eps = VERTICAL_Q_REL * q_ref
        self._upper = self._q < -self._q_eps
        self._lower = self._q > self._q_eps
        self._flat = ~(self._upper | self._lower)
        self._gate_mask = np.array([c.kind == "gate" for c in cons])

    # -- scalar / vectorized evaluation --------------------------------------

    def flux_argument(self, phi_ext, m):
        return self.model.flux_argument(phi_ext, m)

    def margins(self, i_in: float, phi_ext: float, m: int) -> np.ndarray:
        g_val = self.flux_argument(phi_ext, m)
        return self._p0 + self._pg * g_val + self._q * i_in

    def default_m(self, phi_ext) -> np.ndarray:
        """Center of the fluxon search window."""
        theta_frac = self.model.theta0 / (2.0 * math.pi)
        return np.round(-(np.asarray(phi_ext, dtype=float) / self.model.phi0 + theta_frac))

    def m_window(self, phi_ext, halfwidth: int = 3) -> range:
        m0 = self.default_m(np.atleast_1d(phi_ext))
        return range(int(m0.min()) - halfwidth, int(m0.max()) + halfwidth + 1)

    def feasible_interval(self, phi_ext: float, m: int):
        """Open feasibility interval in i_in for one fluxon index.

        Every condition is concave piecewise-affine in i_in once the
        |i_gate| branches are expanded, so the intersection is a single
        interval (possibly empty).
        """
        p = self._p0 + self._pg * self.flux_argument(phi_ext, m)
        lo, hi = -np.inf, np.inf
        if np.any(p[self._flat] <= 0.0):
            return None
        up = self._upper
        if np.any(up):
            hi = np.min(-p[up] / self._q[up])
        dn = self._lower
        if np.any(dn):
            lo = np.max(-p[dn] / self._q[dn])
        if not lo < hi:
            return None
        return lo, hi


def is_superconducting(
    config: DeviceConfig,
    drive: Drive,
    m_halfwidth: int = 3,
    mode: str = "auto",
) -> tuple[bool, int | None]:
    """Whether some fluxon index keeps every current strictly below threshold.

    Equality within ``TIE_EPS_REL`` of a threshold counts as normal, so the
    critical current is a supremum approached from below.  Returns the
    witness fluxon index when superconducting.
    """
    validate_drive(config, drive)
    cs = ConstraintSet(config, drive.v_gate, mode=mode)
    eps = TIE_EPS_REL * cs._scale
    if drive.m is not None:
        window = [int(drive.m)]
    else:
        window = list(cs.m_window(drive.phi_ext, m_halfwidth))
    best_m, best_margin = None, -np.inf
    for m in window:
        margin = np.min((cs.margins(drive.i_in, drive.phi_ext, m) - eps) / cs._scale)
        if margin > best_margin:
            best_margin, best_m = margin, m
    if best_margin > 0.0:
        return True, best_m
    return False, None


@dataclass(frozen=True)
class CriticalPoint:
    """Critical current at one (phi_ext, v_gate) with its binding constraint."""

    i_c: float
    branch_label: str
    fluxon: int
    gate_limited: bool


@dataclass(frozen=True)
class EnvelopeSamples:
    """Raw envelope evaluation on a flux grid (internal detail of sweeps)."""

    phi: np.ndarray
    i_c: np.ndarray
    con_idx: np.ndarray    # binding constraint index into ConstraintSet
    fluxon: np.ndarray
    feasible: np.ndarray   # False where the device is gate-limited everywhere
    reentrant: np.ndarray  # disconnected superconducting set in i_in


def envelope_samples(
    cs: ConstraintSet, phi_ext, m_halfwidth: int = 3
) -> EnvelopeSamples:
    """Critical-current envelope of a constraint set on a flux grid.

    The feasible input-current set per fluxon index is one interval; the
    envelope is the supremum of the interval upper endpoints over the
    fluxon window, with the gate band folded in as two more constraints.
    """
    phi = np.atleast_1d(np.asarray(phi_ext, dtype=float))
    n_phi = phi.size
    window = list(cs.m_window(phi, m_halfwidth))
    n_m = len(window)

    uppers = np.full((n_m, n_phi), np.inf)
    lowers = np.full((n_m, n_phi), -np.inf)
    feasible = np.ones((n_m, n_phi), dtype=bool)
    upper_idx = np.zeros((n_m, n_phi), dtype=int)

    all_idx = np.arange(len(cs.constraints))
    for j, m in enumerate(window):
        p = cs._p0[:, None] + cs._pg[:, None] * cs.flux_argument(phi, m)[None, :]
        if np.any(cs._flat):
            feasible[j] &= np.all(p[cs._flat] > 0.0, axis=0)
        if np.any(cs._upper):
            roots = -p[cs._upper] / cs._q[cs._upper, None]
            k = np.argmin(roots, axis=0)
            uppers[j] = roots[k, np.arange(n_phi)]
            upper_idx[j] = all_idx[cs._upper][k]
        if np.any(cs._lower):
            lowers[j] = np.max(-p[cs._lower] / cs._q[cs._lower, None], axis=0)
        feasible[j] &= lowers[j] < uppers[j]

    any_feasible = np.any(feasible, axis=0)
    masked = np.where(feasible, uppers, -np.inf)
    best = np.argmax(masked, axis=0)
    cols = np.arange(n_phi)
    i_c = masked[best, cols]
    con_out = upper_idx[best, cols]
    m_out = np.array([window[j] for j in best], dtype=int)

    if not np.all(any_feasible):
        # gate-limited everywhere: report the gate band's upper edge
        gm = cs._gate_mask & cs._upper
        if np.any(gm):
            roots = -cs._p0[gm] / cs._q[gm]
            k = int(np.argmin(roots))
            gate_up, gate_idx = float(roots[k]), int(all_idx[gm][k])
        else:
            # ungated loop with no admissible fluxon: no carried supercurrent
            gate_up, gate_idx = 0.0, 0
        off = ~any_feasible
        i_c[off] = gate_up
        con_out[off] = gate_idx
        m_out[off] = cs.default_m(phi[off]).astype(int)

    # Re-entrance: ramping i_in from 0 up to the reported envelope must stay
    # inside the union of per-fluxon intervals; any uncovered band marks the
    # flagged metastable regime.
    reentrant = np.zeros(n_phi, dtype=bool)
    gap_tol = 1e-9 * float(np.max(cs._scale))
    for s in range(n_phi):
        if not any_feasible[s] or i_c[s] <= 0.0:
            continue
        spans = sorted(
            (max(lowers[j, s], 0.0), min(uppers[j, s], i_c[s]))
            for j in range(n_m)
            if feasible[j, s] and min(uppers[j, s], i_c[s]) > max(lowers[j, s], 0.0)
        )
        reach = 0.0
        for lo, hi in spans:
            if lo > reach + gap_tol:
                reentrant[s] = True
                break
            reach = max(reach, hi)
        else:
            if reach < i_c[s] - gap_tol:
                reentrant[s] = True
    return EnvelopeSamples(
        phi=phi,
        i_c=i_c,
        con_idx=con_out,
        fluxon=m_out,
        feasible=any_feasible,
        reentrant=reentrant,
    )


def critical_current_grid(
    config: DeviceConfig,
    phi_ext,
    v_gate=(),
    m_halfwidth: int = 3,
    mode: str = "auto",
):
    """Vectorized critical current across an array of flux values.

    Returns ``(i_c, labels, m, reentrant)`` arrays.  ``labels`` holds the
    binding constraint per sample ("1".."N" or "gate"); ``reentrant``
    marks flux points where the superconducting set in i_in is
    disconnected (the flagged metastable regime).
    """
    cs = ConstraintSet(config, v_gate, mode=mode)
    env = envelope_samples(cs, phi_ext, m_halfwidth)
    labels = np.array([cs.constraints[k].label for k in env.con_idx], dtype=object)
    labels[~env.feasible] = GATE_LABEL if config.gates else "none"
    return env.i_c, labels, env.fluxon, env.reentrant


def critical_current(
    config: DeviceConfig,
    phi_ext: float,
    v_gate=(),
    m_halfwidth: int = 3,
    mode: str = "auto",
) -> CriticalPoint:
    """Device critical current at one flux point.

    The feasible input-current set is the union over the fluxon window of
    per-fluxon intervals, clipped by the gate band; the reported value is
    the supremum of the interval upper endpoints and the label names the
    binding constraint.
    """
    ic, labels, m, _ = critical_current_grid(
        config, [phi_ext], v_gate, m_halfwidth=m_halfwidth, mode=mode
    )
    return CriticalPoint(
        i_c=float(ic[0]),
        branch_label=str(labels[0]),
        fluxon=int(m[0]),
        gate_limited=labels[0] == GATE_LABEL,
    )


# ---------------------------------------------------------------------------
# Critical-condition line geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Line:
    """One critical-condition line i_in = a * (phi_ext + m*phi0) + b.

    Lines of the same condition at different fluxon indices share (a, b);
    m only shifts the argument.  ``vertical`` marks conditions whose i_in
    coefficient vanishes: these constrain phi_ext directly, at
    ``phi = phi_vertical - m * phi0``.
    """

    branch_label: str
    side: int
    gate_signs: tuple[int, ...]
    a: float
    b: float
    vertical: bool = False
    phi_vertical: float = math.nan

    def value(self, phi_ext, m, phi0):
        return self.a * (np.asarray(phi_ext, dtype=float) + m * phi0) + self.b


@dataclass(frozen=True)
class CriticalLines:
    """Critical-condition lines of a device at fixed gate voltages.

    ``primary`` maps each 1-based branch index to its conventional
    binding line (positive threshold on the input arm, negative on the
    return arm; positive-gate-current branch in narrow mode).  ``families``
    holds every condition, including both threshold signs, both gate-sign
    branches and the gate band itself.
    """

    phi0: float
    theta0: float
    m_values: tuple[int, ...]
    primary: dict[int, Line]
    families: tuple[Line, ...]

    def line(self, branch: int, m: int | None = None) -> Line:
        return self.primary[branch]


def _line_from_constraint(cs: ConstraintSet, con: Constraint) -> Line:
    offset = (cs.model.theta0 / (2.0 * math.pi)) * cs.model.phi0
    if abs(con.q) <= cs._q_eps:
        g_star = -con.p0 / con.p_g if con.p_g != 0.0 else math.inf
        return Line(
            branch_label=con.label,
            side=con.side,
            gate_signs=con.gate_signs,
            a=math.inf,
            b=math.nan,
            vertical=True,
            phi_vertical=g_star - offset,
        )
    a = -con.p_g / con.q
    b = -(con.p0 + con.p_g * offset) / con.q
    return Line(
        branch_label=con.label,
        side=con.side,
        gate_signs=con.gate_signs,
        a=a,
        b=b,
    )


def critical_lines(
    config: DeviceConfig,
    m_range,
    v_gate=(),
    mode: str = "auto",
) -> CriticalLines:
    """Affine critical-condition lines versus flux for each fluxon index."""
    cs = ConstraintSet(config, v_gate, mode=mode)
    families = tuple(_line_from_constraint(cs, con) for con in cs.constraints)
    primary: dict[int, Line] = {}
    for con, line in zip(cs.constraints, families):
        if con.kind != "branch":
            continue
        want_side = config.branch_orientation(con.branch)
        if con.side != want_side:
            continue
        if con.gate_signs and any(sg != 1 for sg in con.gate_signs):
            continue
        primary[con.branch] = line
    return CriticalLines(
        phi0=config.phi0,
        theta0=cs.model.theta0,
        m_values=tuple(int(m) for m in m_range),
        primary=primary,
        families=families,
    )
