"""squidgate: simulation and fitting of gated multi-terminal DC-SQUIDs."""
from .circuit import (
    PHI0_SI,
    BranchSpec,
    DeviceConfig,
    Drive,
    GateSpec,
    UnitScales,
    beta_l,
    config_from_dict,
    config_to_dict,
    from_normalized,
    load_config,
    make_gated_squid,
    save_config,
    to_normalized,
    unit_scales,
    validate_device,
    validation_errors,
)
from .errors import ConfigError, SolverError
from .linear import (
    BranchState,
    CriticalLines,
    CriticalPoint,
    critical_current,
    critical_current_grid,
    critical_lines,
    gate_critical_input,
    gate_current,
    gate_input_bounds,
    internal_currents_closed,
    internal_currents_generic,
    is_superconducting,
)
from .oracle import (
    TwoJunctionLoop,
    compare_linearized,
    exact_critical_current,
    linearized_two_junction_ic,
    stability_region,
    symmetric_loop,
)
from .pattern import (
    InterferencePattern,
    RegionMap,
    envelope_stats,
    region_map,
    sweep_pattern,
)
from .fitting import (
    FitResult,
    alpha_star,
    amplitude_shift_predicted,
    effective_inductance,
    fit_parameters,
    phase_shift_measured,
    phase_shift_predicted,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
