"""Command-line interface: config ingestion, sweeps, maps, oracle runs,
fits and serialization.

Numeric option values accept SI-suffixed strings ("10mV", "1nH", "2.5u",
"0.57"): an optional decimal/scientific number, an optional SI prefix
(f p n u/µ m k M G T) and an optional unit symbol (V, A, H, Wb, Ohm).
The unit symbol is checked against the option's expected dimension; the
prefix scales the value.  Plain numbers pass through unchanged, so
normalized-unit configs take dimensionless inputs naturally.

Exit codes: 0 success, 1 input/config error, 2 numerical failure.
CSV and JSON outputs are byte-identical across reruns for identical
inputs and seed.
"""
from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from .circuit import load_config, save_config, validate_device, validation_errors
from .errors import ConfigError, SolverError
from .fitting import (
    alpha_star,
    amplitude_shift_predicted,
    fit_parameters,
    phase_shift_measured,
    phase_shift_predicted,
)
from .linear import gate_critical_input
from .oracle import (
    TwoJunctionLoop,
    compare_linearized,
    stability_region,
    symmetric_loop,
)
from .pattern import (
    GATE_LIMITED,
    NORMAL,
    SC,
    STATE_NAMES,
    InterferencePattern,
    RegionMap,
    region_map,
    sweep_pattern,
)

SCHEMA_VERSION = 1

_PREFIXES = {
    "f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "μ": 1e-6,
    "m": 1e-3, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12,
}
_UNITS = ("Ohm", "ohm", "Wb", "V", "A", "H", "Ω")
_QUANTITY_RE = re.compile(
    r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([a-zA-ZµμΩ]*)\s*$"
)


def parse_quantity(text: str, expect_unit: str | None = None) -> float:
    """Parse a number with optional SI prefix and unit symbol."""
    match = _QUANTITY_RE.match(str(text))
    if not match:
        raise ConfigError([f"cannot parse quantity {text!r}"])
    value = float(match.group(1))
    suffix = match.group(2)
    unit = ""
    for u in _UNITS:
        if suffix.endswith(u):
            unit = u
            suffix = suffix[: -len(u)]
            break
    if suffix:
        if suffix not in _PREFIXES:
            raise ConfigError([f"unknown SI prefix {suffix!r} in {text!r}"])
        value *= _PREFIXES[suffix]
    if unit and expect_unit:
        canonical = {"Ω": "Ohm", "ohm": "Ohm"}.get(unit, unit)
        if canonical != expect_unit:
            raise ConfigError(
                [f"expected a {expect_unit} value, got unit {unit!r} in {text!r}"]
            )
    return value


def _fmt(x) -> str:
    """Deterministic shortest-roundtrip float formatting for CSV/JSON."""
    return format(float(x), ".17g")


@dataclass
class RunSpec:
    """Fully resolved description of one CLI invocation."""

    command: str
    config_path: str | None = None
    phi_start: float | None = None
    phi_stop: float | None = None
    phi_count: int = 601
    i_in_start: float | None = None
    i_in_stop: float | None = None
    i_in_count: int = 201
    v_gate: tuple[float, ...] = ()
    m_halfwidth: int = 3
    mode: str = "auto"
    seed: int = 0
    output: str | None = None
    plot: str | None = None
    # oracle parameters
    loop: TwoJunctionLoop | None = None
    lobes: bool = False
    # fit parameters
    data_path: str | None = None
    free_params: tuple[str, ...] = ()
    bounds: dict = field(default_factory=dict)
    n_starts: int = 8

    def validate(self) -> None:
        errs = []
        if self.phi_count < 2:
            errs.append("phi count must be >= 2")
        if self.command == "map" and self.i_in_count < 2:
            errs.append("i_in count must be >= 2")
        if errs:
            raise ConfigError(errs)


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _json_report(payload: dict) -> str:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _pattern_csv(pattern: InterferencePattern) -> str:
    lines = ["phi_ext,i_c,branch,m"]
    for phi, ic, label, m in zip(
        pattern.phi, pattern.i_c, pattern.branch_labels, pattern.fluxons
    ):
        lines.append(f"{_fmt(phi)},{_fmt(ic)},{label},{int(m)}")
    return "\n".join(lines) + "\n"


def _map_csv(rmap: RegionMap) -> str:
    lines = ["phi_ext,i_in,state"]
    for j, i_val in enumerate(rmap.i_in):
        for k, phi in enumerate(rmap.phi):
            lines.append(f"{_fmt(phi)},{_fmt(i_val)},{STATE_NAMES[int(rmap.states[j, k])]}")
    return "\n".join(lines) + "\n"


def _oracle_csv(comparison) -> str:
    lines = ["phi_ext,i_c_exact,i_c_linear"]
    for phi, ex, li in zip(comparison.phi, comparison.i_c_exact, comparison.i_c_linear):
        lines.append(f"{_fmt(phi)},{_fmt(ex)},{_fmt(li)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Plot emission (SVG; deterministic for fixed input)
# ---------------------------------------------------------------------------

def emit_plot(obj, path: str, lobes=()) -> None:
    """Render a pattern, region map or oracle comparison to an SVG file."""
    import matplotlib

    matplotlib.use("svg", force=False)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "squidgate"

    if isinstance(obj, InterferencePattern):
        fig, ax = plt.subplots(figsize=(7, 4))
        phi0 = obj.phi0
        ax.plot(obj.phi / phi0, obj.i_c, color="tab:red", lw=1.5, label="critical current")
        vx = [v.phi / phi0 for v in obj.vertices]
        vy = [v.i_in for v in obj.vertices]
        ax.plot(vx, vy, "k.", ms=4, label="vertices")
        ax.set_xlabel(r"$\Phi_\mathrm{ext}/\Phi_0$")
        ax.set_ylabel(r"$I_\mathrm{in}$")
        ax.legend(loc="best", fontsize=8)
    elif isinstance(obj, RegionMap):
        from matplotlib.colors import ListedColormap

        fig, ax = plt.subplots(figsize=(7, 4))
        cmap = ListedColormap(["#2166ac", "#b2182b", "#fddbc7"])
        ax.imshow(
            obj.states,
            origin="lower",
            aspect="auto",
            extent=(obj.phi[0], obj.phi[-1], obj.i_in[0], obj.i_in[-1]),
            cmap=cmap,
            vmin=-0.5,
            vmax=2.5,
            interpolation="nearest",
        )
        handles = [
            plt.Rectangle((0, 0), 1, 1, fc=cmap(i)) for i in range(3)
        ]
        ax.legend(handles, [STATE_NAMES[SC], STATE_NAMES[NORMAL], STATE_NAMES[GATE_LIMITED]],
                  loc="upper right", fontsize=8)
        ax.set_xlabel(r"$\Phi_\mathrm{ext}/\Phi_0$")
        ax.set_ylabel(r"$I_\mathrm{in}$")
    else:  # oracle comparison, optionally with stability lobes
        fig, (ax, ax_res) = plt.subplots(
            2, 1, figsize=(7, 5.5), sharex=True, height_ratios=[3, 1]
        )
        ax.plot(obj.phi, obj.i_c_exact, color="k", lw=1.5, label="exact")
        ax.plot(obj.phi, obj.i_c_linear, color="tab:red", lw=1.2, ls="--", label="linearized")
        for region in lobes:
            mask = region.exists
            ax.plot(region.phi[mask], region.i_upper[mask], lw=0.9, alpha=0.8,
                    label=f"lobe m={region.fluxon}")
        ax.set_ylabel(r"$I_\mathrm{in}$")
        ax.legend(loc="best", fontsize=7)
        ax_res.plot(obj.phi, obj.i_c_exact - obj.i_c_linear, color="tab:blue", lw=1.0)
        ax_res.axhline(0.0, color="k", lw=0.5)
        ax_res.set_xlabel(r"$\Phi_\mathrm{ext}/\Phi_0$")
        ax_res.set_ylabel("residual")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------

def _default_phi_range(spec: RunSpec, phi0: float) -> tuple[float, float]:
    start = -1.5 * phi0 if spec.phi_start is None else spec.phi_start
    stop = 1.5 * phi0 if spec.phi_stop is None else spec.phi_stop
    return start, stop


def _gate_voltages(spec: RunSpec, config) -> tuple[float, ...]:
    """Supplied gate voltages, defaulting to zero volts per gate."""
    if spec.v_gate:
        return spec.v_gate
    return (0.0,) * len(config.gates)


def _cmd_validate(spec: RunSpec) -> int:
    config = load_config(spec.config_path)
    errs = validation_errors(config)
    if errs:
        for e in errs:
            print(f"invalid: {e}", file=sys.stderr)
        return 1
    print(f"ok: {config.n_branches} branches, {len(config.gates)} gate(s), "
          f"units={config.units}")
    if spec.output:
        save_config(config, spec.output)
    return 0


def _cmd_sweep(spec: RunSpec) -> int:
    config = validate_device(load_config(spec.config_path))
    start, stop = _default_phi_range(spec, config.phi0)
    pattern = sweep_pattern(
        config,
        (start, stop),
        spec.phi_count,
        v_gate=_gate_voltages(spec, config),
        m_halfwidth=spec.m_halfwidth,
        mode=spec.mode,
    )
    if spec.output:
        _write_text(spec.output, _pattern_csv(pattern))
    if spec.plot:
        emit_plot(pattern, spec.plot)
    print(
        f"sweep: {spec.phi_count} samples, {len(pattern.vertices)} vertices, "
        f"reentrant={pattern.reentrant}"
    )
    return 0


def _cmd_map(spec: RunSpec) -> int:
    config = validate_device(load_config(spec.config_path))
    start, stop = _default_phi_range(spec, config.phi0)
    if spec.i_in_start is None or spec.i_in_stop is None:
        raise ConfigError(["map needs --iin-start and --iin-stop"])
    phi = np.linspace(start, stop, spec.phi_count)
    i_in = np.linspace(spec.i_in_start, spec.i_in_stop, spec.i_in_count)
    rmap = region_map(
        config, phi, i_in, v_gate=_gate_voltages(spec, config),
        m_halfwidth=spec.m_halfwidth, mode=spec.mode,
    )
    if spec.output:
        _write_text(spec.output, _map_csv(rmap))
    if spec.plot:
        emit_plot(rmap, spec.plot)
    counts = {STATE_NAMES[s]: int(np.sum(rmap.states == s)) for s in (SC, NORMAL, GATE_LIMITED)}
    print("map:", ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return 0


def _cmd_oracle(spec: RunSpec) -> int:
    loop = spec.loop
    start = -1.5 * loop.phi0 if spec.phi_start is None else spec.phi_start
    stop = 1.5 * loop.phi0 if spec.phi_stop is None else spec.phi_stop
    phi = np.linspace(start, stop, spec.phi_count)
    comparison = compare_linearized(loop, phi, m_halfwidth=spec.m_halfwidth)
    if spec.output:
        _write_text(spec.output, _oracle_csv(comparison))
    lobes = []
    if spec.lobes:
        m0 = round(-0.5 * (start + stop) / loop.phi0)
        lobes = [stability_region(loop, m, phi) for m in range(m0 - 2, m0 + 3)]
    if spec.plot:
        emit_plot(comparison, spec.plot, lobes=lobes)
    print(
        f"oracle: max |exact - linear| / i_c_scale = "
        f"{comparison.max_normalized_error:.3e}"
    )
    return 0


def _cmd_shift(spec: RunSpec) -> int:
    config = validate_device(load_config(spec.config_path))
    if len(spec.v_gate) != 2:
        raise ConfigError(["shift needs exactly two --v-gate values"])
    v_a, v_b = spec.v_gate
    start, stop = _default_phi_range(spec, config.phi0)
    if stop - start < 2.0 * config.phi0:
        start, stop = -1.5 * config.phi0, 1.5 * config.phi0
    pattern_a = sweep_pattern(config, (start, stop), spec.phi_count, v_gate=(v_a,),
                              m_halfwidth=spec.m_halfwidth, mode=spec.mode)
    pattern_b = sweep_pattern(config, (start, stop), spec.phi_count, v_gate=(v_b,),
                              m_halfwidth=spec.m_halfwidth, mode=spec.mode)
    predicted = phase_shift_predicted(config, v_b) - phase_shift_predicted(config, v_a)
    measured = phase_shift_measured(pattern_a, pattern_b)
    payload = {
        "command": "shift",
        "v_gate": [v_a, v_b],
        "predicted_shift_flux": predicted,
        "measured_shift_flux": measured,
        "difference": measured - predicted,
        "phi0": config.phi0,
        "predicted_shift_rad": -2.0 * np.pi * predicted / config.phi0,
        "gate_critical_input": gate_critical_input(config, v_b),
    }
    try:
        payload["amplitude_shift_predicted"] = amplitude_shift_predicted(config, v_b)
    except SolverError as exc:
        payload["amplitude_shift_predicted"] = None
        payload["amplitude_shift_error"] = str(exc)
    text = _json_report(payload)
    if spec.output:
        _write_text(spec.output, text)
    else:
        print(text, end="")
    return 0


def _cmd_alpha(spec: RunSpec) -> int:
    config = validate_device(load_config(spec.config_path))
    raw = alpha_star(config)
    payload = {
        "command": "alpha",
        "alpha_star": raw,
        "alpha_star_clamped": max(raw, 0.0),
        "physical": bool(raw >= 0.0),
    }
    text = _json_report(payload)
    if spec.output:
        _write_text(spec.output, text)
    else:
        print(text, end="")
    return 0


def _read_fit_csv(path: str):
    """Read fit data: columns phi_ext, i_c and optional v_g (header required)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ConfigError([f"{path}: empty data file"])
        required = ["phi_ext", "i_c"]
        if header[: len(required)] != required:
            raise ConfigError(
                [f"{path}: header must start with 'phi_ext,i_c' (got {','.join(header)})"]
            )
        has_vg = len(header) > 2 and header[2] == "v_g"
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                phi = float(row[0])
                ic = float(row[1])
                vg = float(row[2]) if has_vg else 0.0
            except (ValueError, IndexError) as exc:
                raise ConfigError([f"{path}: line {line_no}: {exc}"])
            rows.append((vg, phi, ic))
    curves = {}
    for vg, phi, ic in rows:
        curves.setdefault(vg, []).append((phi, ic))
    out = []
    for vg in sorted(curves):
        pts = sorted(curves[vg])
        phi = np.array([p for p, _ in pts])
        ic = np.array([c for _, c in pts])
        out.append((phi, ic, (vg,)))
    return out


def _parse_bounds(text: str) -> dict:
    """Parse 'name=lo:hi,name=lo:hi' bound descriptions."""
    bounds = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            name, span = chunk.split("=")
            lo, hi = span.split(":")
        except ValueError:
            raise ConfigError([f"cannot parse bound {chunk!r} (want name=lo:hi)"])
        bounds[name.strip()] = (parse_quantity(lo), parse_quantity(hi))
    return bounds


def _cmd_fit(spec: RunSpec) -> int:
    config = validate_device(load_config(spec.config_path))
    curves = _read_fit_csv(spec.data_path)
    result = fit_parameters(
        curves,
        config,
        spec.free_params,
        spec.bounds,
        seed=spec.seed,
        n_starts=spec.n_starts,
        m_halfwidth=spec.m_halfwidth,
        mode=spec.mode,
    )
    payload = {
        "command": "fit",
        "params": result.params,
        "rms": result.rms,
        "iterations": result.iterations,
        "converged": result.converged,
        "bounds": {k: list(v) for k, v in result.bounds.items()},
        "n_starts": result.n_starts,
        "best_start": result.best_start,
        "seed": spec.seed,
        "n_curves": len(curves),
    }
    text = _json_report(payload)
    if spec.output:
        _write_text(spec.output, text)
    else:
        print(text, end="")
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "sweep": _cmd_sweep,
    "map": _cmd_map,
    "oracle": _cmd_oracle,
    "shift": _cmd_shift,
    "alpha": _cmd_alpha,
    "fit": _cmd_fit,
}


def run(spec: RunSpec) -> int:
    """Execute a resolved RunSpec; returns the process exit status."""
    spec.validate()
    handler = _COMMANDS.get(spec.command)
    if handler is None:
        raise ConfigError([f"unknown command {spec.command!r}"])
    return handler(spec)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, flux: bool = True) -> None:
    if flux:
        p.add_argument("--phi-start", type=str, default=None,
                       help="sweep start flux (SI-suffixed; default -1.5*phi0)")
        p.add_argument("--phi-stop", type=str, default=None,
                       help="sweep stop flux (default +1.5*phi0)")
        p.add_argument("--phi-count", type=int, default=601,
                       help="number of flux samples (>= 2)")
    p.add_argument("--m-halfwidth", type=int, default=3,
                   help="fluxon search half-width around the nominal index")
    p.add_argument("--mode", choices=("auto", "wide", "narrow"), default="auto",
                   help="threshold law for gated branches")
    p.add_argument("-o", "--output", default=None, help="output file path")
    p.add_argument("--plot", default=None, help="SVG plot output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squidgate",
        description="Gated DC-SQUID interference simulation and fitting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a device config file")
    p.add_argument("config")
    p.add_argument("-o", "--output", default=None,
                   help="re-emit the normalized config JSON here")

    p = sub.add_parser("sweep", help="critical-current interference pattern")
    p.add_argument("config")
    p.add_argument("--v-gate", type=str, action="append", default=None,
                   help="gate voltage (repeat per gate; SI-suffixed)")
    _add_common(p)

    p = sub.add_parser("map", help="superconducting/normal/gate-limited region map")
    p.add_argument("config")
    p.add_argument("--v-gate", type=str, action="append", default=None)
    p.add_argument("--iin-start", type=str, required=True)
    p.add_argument("--iin-stop", type=str, required=True)
    p.add_argument("--iin-count", type=int, default=201)
    _add_common(p)

    p = sub.add_parser("oracle", help="exact two-junction loop vs linearized model")
    p.add_argument("--beta-l", type=str, default=None,
                   help="symmetric loop screening parameter (normalized units)")
    p.add_argument("--l1", type=str, default=None)
    p.add_argument("--l2", type=str, default=None)
    p.add_argument("--ic1", type=str, default=None)
    p.add_argument("--ic2", type=str, default=None)
    p.add_argument("--phi0", type=str, default="1.0")
    p.add_argument("--lobes", action="store_true",
                   help="overlay per-fluxon stability lobes on the plot")
    _add_common(p)

    p = sub.add_parser("shift", help="predicted vs measured pattern shift")
    p.add_argument("config")
    p.add_argument("--v-gate", type=str, action="append", required=True,
                   help="give exactly twice: reference and shifted voltage")
    _add_common(p)

    p = sub.add_parser("alpha", help="zero-inductance coupling threshold")
    p.add_argument("config")
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("fit", help="fit device parameters to i_c(phi) data")
    p.add_argument("config")
    p.add_argument("data", help="CSV with header phi_ext,i_c[,v_g]")
    p.add_argument("--free", required=True,
                   help="comma-separated parameter names (e.g. L2,alpha,theta0)")
    p.add_argument("--bounds", required=True,
                   help="bounds as name=lo:hi[,name=lo:hi...]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=8)
    _add_common(p, flux=False)

    return parser


def _spec_from_args(args: argparse.Namespace) -> RunSpec:
    spec = RunSpec(command=args.command)
    spec.config_path = getattr(args, "config", None)
    spec.output = getattr(args, "output", None)
    spec.plot = getattr(args, "plot", None)
    spec.mode = getattr(args, "mode", "auto")
    spec.m_halfwidth = getattr(args, "m_halfwidth", 3)
    if getattr(args, "phi_start", None) is not None:
        spec.phi_start = parse_quantity(args.phi_start, "Wb")
    if getattr(args, "phi_stop", None) is not None:
        spec.phi_stop = parse_quantity(args.phi_stop, "Wb")
    spec.phi_count = getattr(args, "phi_count", 601)
    v_gate = getattr(args, "v_gate", None)
    if v_gate:
        spec.v_gate = tuple(parse_quantity(v, "V") for v in v_gate)
    if args.command == "map":
        spec.i_in_start = parse_quantity(args.iin_start, "A")
        spec.i_in_stop = parse_quantity(args.iin_stop, "A")
        spec.i_in_count = args.iin_count
    if args.command == "oracle":
        if args.beta_l is not None:
            spec.loop = symmetric_loop(parse_quantity(args.beta_l),
                                       phi0=parse_quantity(args.phi0))
        else:
            needed = (args.l1, args.l2, args.ic1, args.ic2)
            if any(v is None for v in needed):
                raise ConfigError(["oracle needs --beta-l or all of --l1/--l2/--ic1/--ic2"])
            spec.loop = TwoJunctionLoop(
                l1=parse_quantity(args.l1, "H"),
                l2=parse_quantity(args.l2, "H"),
                ic1=parse_quantity(args.ic1, "A"),
                ic2=parse_quantity(args.ic2, "A"),
                phi0=parse_quantity(args.phi0),
            )
        spec.lobes = args.lobes
    if args.command == "fit":
        spec.data_path = args.data
        spec.free_params = tuple(s.strip() for s in args.free.split(",") if s.strip())
        spec.bounds = _parse_bounds(args.bounds)
        spec.seed = args.seed
        spec.n_starts = args.starts
    return spec


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _spec_from_args(args)
        return run(spec)
    except ConfigError as exc:
        for line in exc.violations:
            print(f"error: {line}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        for key, val in exc.context.items():
            print(f"  {key} = {val}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
