"""Domain types, validation and unit handling for gated-SQUID circuits.

A device is a single superconducting loop made of N weak-link branches
arranged in a ring.  Nodes are numbered 0..N-1 and branch ``i`` (1-based)
connects node ``i-1`` to node ``i % N``, with positive current flowing in
that direction.  The input current enters at ``input_node`` (default 0)
and the output resistor hangs off ``output_node`` (default N-1), so for
the canonical three-branch device branches 1 and 2 form the gated arm and
branch 3 is the return arm.  Gate ports attach at interior nodes through
a series resistor.

Two unit modes are supported:

* ``"SI"``: henry / ampere / ohm / volt / weber, with the flux quantum
  fixed at ``PHI0_SI``.
* ``"normalized"``: the flux quantum, a reference current and a reference
  resistance are all 1.  Tests default to this mode.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace

from .errors import ConfigError

#: Magnetic flux quantum h/2e in weber (CODATA).
PHI0_SI = 2.067833848e-15

_CPR_KINDS = ("sinusoidal",)
_UNIT_MODES = ("SI", "normalized")


@dataclass(frozen=True)
class BranchSpec:
    """One weak-link branch of the loop.

    ``inductance`` is the total (kinetic plus geometric) series inductance
    of the branch, treated as a single lumped number.  ``cpr`` names the
    current-phase relation; only ``"sinusoidal"`` ships, but any analytic
    CPR with a flat maximum fits the linearized solver.
    """

    index: int
    inductance: float
    critical_current: float
    cpr: str = "sinusoidal"


@dataclass(frozen=True)
class GateSpec:
    """A resistive gate port attached at ring node ``node``.

    ``coupling_alpha`` > 0 switches the adjacent branches into the
    narrow-gate regime where their thresholds are suppressed by the gate
    current.  ``width_ratio`` (w_gate / w_link) is descriptive metadata
    only; it never enters the equations.
    """

    node: int
    r_gate: float
    r_out: float
    gate_threshold: float
    coupling_alpha: float = 0.0
    width_ratio: float | None = None


@dataclass(frozen=True)
class DeviceConfig:
    """Full circuit description: branches, gates, flux offset and units.

    ``theta0`` is either an explicit offset in radians or ``"auto"``,
    which resolves to sum((pi/2) * sign(I_i)) using the positive-bias sign
    pattern: +1 for branches on the input->output arm, -1 for the return
    arm.  That is the sign pattern the solved currents take at the
    superconducting-normal transition under positive input current.
    """

    branches: tuple[BranchSpec, ...]
    gates: tuple[GateSpec, ...] = ()
    theta0: float | str = 0.0
    phi0: float = PHI0_SI
    units: str = "SI"
    input_node: int = 0
    output_node: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "gates", tuple(self.gates))

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    def resolved_output_node(self) -> int:
        if self.output_node is None:
            return self.n_branches - 1
        return self.output_node

    def branch_orientation(self, index: int) -> int:
        """+1 if 1-based branch ``index`` lies on the input->output arm."""
        return 1 if index <= self.resolved_output_node() else -1

    def resolved_theta0(self) -> float:
        if self.theta0 == "auto":
            return sum(
                (math.pi / 2.0) * self.branch_orientation(b.index)
                for b in self.branches
            )
        return float(self.theta0)

    def digest(self) -> str:
        """Stable content hash of the configuration."""
        return hashlib.sha256(
            json.dumps(config_to_dict(self), sort_keys=True).encode()
        ).hexdigest()[:16]


@dataclass(frozen=True)
class Drive:
    """External knobs: input current, gate voltages, flux, optional fluxon.

    ``v_gate`` holds one entry per gate, in gate order.
    """

    i_in: float = 0.0
    v_gate: tuple[float, ...] = ()
    phi_ext: float = 0.0
    m: int | None = None

    def __post_init__(self):
        if isinstance(self.v_gate, (int, float)):
            object.__setattr__(self, "v_gate", (float(self.v_gate),))
        else:
            object.__setattr__(self, "v_gate", tuple(self.v_gate))


@dataclass(frozen=True)
class UnitScales:
    """Multiplicative scales mapping normalized values back to SI."""

    current: float = 1.0
    flux: float = 1.0
    resistance: float = 1.0

    @property
    def inductance(self) -> float:
        return self.flux / self.current

    @property
    def voltage(self) -> float:
        return self.resistance * self.current


def beta_l(branch: BranchSpec, phi0: float) -> float:
    """Screening parameter (2*pi/phi0) * L * I_c of one branch."""
    return (2.0 * math.pi / phi0) * branch.inductance * branch.critical_current


def validation_errors(config: DeviceConfig) -> list[str]:
    """All invariant violations of ``config`` (empty list when valid)."""
    errs: list[str] = []
    n = config.n_branches
    if n < 2:
        errs.append("device needs at least 2 branches")
    for pos, b in enumerate(config.branches, start=1):
        if b.index != pos:
            errs.append(f"branch at position {pos} carries index {b.index}")
        if not (b.inductance > 0.0 and math.isfinite(b.inductance)):
            errs.append(f"branch {pos}: inductance must be positive")
        if not (b.critical_current > 0.0 and math.isfinite(b.critical_current)):
            errs.append(f"branch {pos}: critical_current must be positive")
        if b.cpr not in _CPR_KINDS:
            errs.append(f"branch {pos}: unknown cpr kind {b.cpr!r}")
    if not (config.phi0 > 0.0 and math.isfinite(config.phi0)):
        errs.append("phi0 must be positive")
    if config.units not in _UNIT_MODES:
        errs.append(f"units must be one of {_UNIT_MODES}")
    if config.units == "normalized" and config.phi0 != 1.0:
        errs.append("normalized mode requires phi0 == 1")
    if not (0 <= config.input_node < max(n, 1)):
        errs.append(f"dangling input node {config.input_node}")
    out = config.resolved_output_node()
    if not (0 <= out < max(n, 1)):
        errs.append(f"dangling output node {out}")
    if n >= 2 and out == config.input_node:
        errs.append("input and output nodes coincide")
    r_outs = set()
    for k, g in enumerate(config.gates):
        if not (0 <= g.node < n):
            errs.append(f"gate {k}: dangling attachment at node {g.node}")
        elif g.node in (config.input_node, out):
            errs.append(f"gate {k}: attachment at a terminal node {g.node}")
        if not (g.r_gate > 0.0 and math.isfinite(g.r_gate)):
            errs.append(f"gate {k}: r_gate must be positive")
        if not (g.r_out > 0.0 and math.isfinite(g.r_out)):
            errs.append(f"gate {k}: r_out must be positive")
        if not (g.gate_threshold > 0.0 and math.isfinite(g.gate_threshold)):
            errs.append(f"gate {k}: gate_threshold must be positive")
        if not (g.coupling_alpha >= 0.0 and math.isfinite(g.coupling_alpha)):
            errs.append(f"gate {k}: coupling_alpha must be >= 0")
        r_outs.add(g.r_out)
    if len(r_outs) > 1:
        errs.append("all gates must share one output resistance r_out")
    if config.theta0 != "auto":
        try:
            t0 = float(config.theta0)
        except (TypeError, ValueError):
            errs.append("theta0 must be a number or 'auto'")
        else:
            if not math.isfinite(t0):
                errs.append("theta0 must be finite")
    return errs


def validate_device(config: DeviceConfig) -> DeviceConfig:
    """Return ``config`` unchanged when valid, else raise ``ConfigError``."""
    errs = validation_errors(config)
    if errs:
        raise ConfigError(errs)
    return config


def validate_drive(config: DeviceConfig, drive: Drive) -> Drive:
    errs = []
    for name, value in (("i_in", drive.i_in), ("phi_ext", drive.phi_ext)):
        if not math.isfinite(value):
            errs.append(f"{name} must be finite")
    if len(drive.v_gate) != len(config.gates):
        errs.append(
            f"drive carries {len(drive.v_gate)} gate voltages for "
            f"{len(config.gates)} gates"
        )
    if any(not math.isfinite(v) for v in drive.v_gate):
        errs.append("gate voltages must be finite")
    if drive.m is not None and drive.m != int(drive.m):
        errs.append("fluxon index m must be an integer")
    if errs:
        raise ConfigError(errs)
    return drive


def unit_scales(config: DeviceConfig) -> UnitScales:
    """Reference scales used by ``to_normalized``.

    Normalized configs are their own reference frame, so all scales are 1
    and conversion is the identity.
    """
    if config.units == "normalized":
        return UnitScales()
    current = config.branches[0].critical_current
    resistance = config.gates[0].r_gate if config.gates else 1.0
    return UnitScales(current=current, flux=config.phi0, resistance=resistance)


def to_normalized(
    config: DeviceConfig, drive: Drive | None = None
) -> tuple[DeviceConfig, Drive | None, UnitScales]:
    """Rescale a config (and optionally a drive) to model units.

    Returns ``(config, drive, scales)``; ``from_normalized`` with the same
    scales inverts the map.  Applying it to an already-normalized config
    is the identity.
    """
    scales = unit_scales(config)
    if config.units == "normalized":
        return config, drive, scales
    branches = tuple(
        replace(
            b,
            inductance=b.inductance / scales.inductance,
            critical_current=b.critical_current / scales.current,
        )
        for b in config.branches
    )
    gates = tuple(
        replace(
            g,
            r_gate=g.r_gate / scales.resistance,
            r_out=g.r_out / scales.resistance,
            gate_threshold=g.gate_threshold / scales.current,
        )
        for g in config.gates
    )
    norm = replace(config, branches=branches, gates=gates, phi0=1.0, units="normalized")
    norm_drive = None
    if drive is not None:
        norm_drive = Drive(
            i_in=drive.i_in / scales.current,
            v_gate=tuple(v / scales.voltage for v in drive.v_gate),
            phi_ext=drive.phi_ext / scales.flux,
            m=drive.m,
        )
    return norm, norm_drive, scales


def from_normalized(
    config: DeviceConfig, drive: Drive | None, scales: UnitScales
) -> tuple[DeviceConfig, Drive | None]:
    """Invert ``to_normalized`` with the scales it returned."""
    if scales == UnitScales():
        return config, drive
    branches = tuple(
        replace(
            b,
            inductance=b.inductance * scales.inductance,
            critical_current=b.critical_current * scales.current,
        )
        for b in config.branches
    )
    gates = tuple(
        replace(
            g,
            r_gate=g.r_gate * scales.resistance,
            r_out=g.r_out * scales.resistance,
            gate_threshold=g.gate_threshold * scales.current,
        )
        for g in config.gates
    )
    si = replace(config, branches=branches, gates=gates, phi0=scales.flux, units="SI")
    si_drive = None
    if drive is not None:
        si_drive = Drive(
            i_in=drive.i_in * scales.current,
            v_gate=tuple(v * scales.voltage for v in drive.v_gate),
            phi_ext=drive.phi_ext * scales.flux,
            m=drive.m,
        )
    return si, si_drive


# ---------------------------------------------------------------------------
# Structured-text configuration files (JSON schema, documented in README)
# ---------------------------------------------------------------------------

def config_to_dict(config: DeviceConfig) -> dict:
    out = {
        "branches": [
            {
                "inductance": b.inductance,
                "critical_current": b.critical_current,
                "cpr": b.cpr,
            }
            for b in config.branches
        ],
        "gates": [
            {
                "node": g.node,
                "r_gate": g.r_gate,
                "r_out": g.r_out,
                "gate_threshold": g.gate_threshold,
                "coupling_alpha": g.coupling_alpha,
                "width_ratio": g.width_ratio,
            }
            for g in config.gates
        ],
        "theta0": config.theta0,
        "units": config.units,
        "phi0": config.phi0,
        "input_node": config.input_node,
        "output_node": config.resolved_output_node(),
    }
    return out


def config_from_dict(data: dict) -> DeviceConfig:
    try:
        branches = tuple(
            BranchSpec(
                index=i + 1,
                inductance=float(b["inductance"]),
                critical_current=float(b["critical_current"]),
                cpr=b.get("cpr", "sinusoidal"),
            )
            for i, b in enumerate(data["branches"])
        )
        gates = tuple(
            GateSpec(
                node=int(g["node"]),
                r_gate=float(g["r_gate"]),
                r_out=float(g["r_out"]),
                gate_threshold=float(g["gate_threshold"]),
                coupling_alpha=float(g.get("coupling_alpha", 0.0)),
                width_ratio=g.get("width_ratio"),
            )
            for g in data.get("gates", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError([f"malformed config field: {exc}"]) from exc
    theta0 = data.get("theta0", 0.0)
    if theta0 != "auto":
        theta0 = float(theta0)
    units = data.get("units", "SI")
    phi0 = float(data.get("phi0", 1.0 if units == "normalized" else PHI0_SI))
    config = DeviceConfig(
        branches=branches,
        gates=gates,
        theta0=theta0,
        phi0=phi0,
        units=units,
        input_node=int(data.get("input_node", 0)),
        output_node=(
            int(data["output_node"]) if data.get("output_node") is not None else None
        ),
    )
    return validate_device(config)


def load_config(path) -> DeviceConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config is not valid JSON: line {exc.lineno}: {exc.msg}"])
    return config_from_dict(data)


def save_config(config: DeviceConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")


def make_gated_squid(
    inductances,
    critical_currents,
    r_gate: float,
    r_out: float,
    gate_threshold: float,
    coupling_alpha: float = 0.0,
    theta0: float | str = 0.0,
    phi0: float = 1.0,
    units: str = "normalized",
    gate_node: int = 1,
    width_ratio: float | None = None,
) -> DeviceConfig:
    """Convenience constructor for the canonical single-gate three-branch loop."""
    if isinstance(critical_currents, (int, float)):
        critical_currents = [critical_currents] * len(tuple(inductances))
    branches = tuple(
        BranchSpec(index=i + 1, inductance=float(l), critical_current=float(ic))
        for i, (l, ic) in enumerate(zip(inductances, critical_currents))
    )
    gate = GateSpec(
        node=gate_node,
        r_gate=r_gate,
        r_out=r_out,
        gate_threshold=gate_threshold,
        coupling_alpha=coupling_alpha,
        width_ratio=width_ratio,
    )
    return validate_device(
        DeviceConfig(branches=branches, gates=(gate,), theta0=theta0, phi0=phi0, units=units)
    )
