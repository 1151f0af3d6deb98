"""Shared fixtures: canonical devices and randomized config generators."""
import numpy as np
import pytest

from squidgate.circuit import (
    PHI0_SI,
    BranchSpec,
    DeviceConfig,
    GateSpec,
    make_gated_squid,
)


def make3(
    inductances=(1.0, 1.0, 2.0),
    ic=1.0,
    r_gate=1.0,
    r_out=0.57,
    gate_threshold=1e3,
    alpha=0.0,
    theta0=0.0,
):
    """Canonical normalized three-branch single-gate device."""
    return make_gated_squid(
        inductances,
        ic,
        r_gate=r_gate,
        r_out=r_out,
        gate_threshold=gate_threshold,
        coupling_alpha=alpha,
        theta0=theta0,
    )


def make_si_device():
    """A physically plausible SI-unit device (pH inductances, uA currents)."""
    return make_gated_squid(
        (100e-12, 100e-12, 200e-12),
        (5e-6, 20e-6, 5e-6),
        r_gate=500.0,
        r_out=285.0,
        gate_threshold=1e-3,
        theta0=0.0,
        phi0=PHI0_SI,
        units="SI",
    )


def random_config(rng, narrow=False, equal_ic=True, random_theta0=False):
    """Random valid normalized three-branch device, away from degeneracies."""
    l = rng.uniform(0.5, 3.0, size=3)
    ic = rng.uniform(0.5, 2.0)
    ics = ic if equal_ic else rng.uniform(0.5, 2.0, size=3)
    r_gate = rng.uniform(0.5, 2.0)
    r = rng.uniform(0.2, 0.9)
    alpha = 0.0
    if narrow:
        a_star = (l[2] / r - l[0]) / np.sum(l)
        alpha = rng.uniform(0.05, 0.6) * max(a_star, 0.2)
    theta0 = rng.uniform(-np.pi, np.pi) if random_theta0 else 0.0
    return make_gated_squid(
        l.tolist(),
        ics if np.isscalar(ics) else ics.tolist(),
        r_gate=r_gate,
        r_out=r * r_gate,
        gate_threshold=1e3,
        coupling_alpha=alpha,
        theta0=theta0,
    )


def make_double_gated():
    """Five-branch loop with two gated nodes on the input arm."""
    branches = tuple(
        BranchSpec(index=i + 1, inductance=l, critical_current=1.0)
        for i, l in enumerate((1.0, 0.8, 1.2, 1.5, 0.9))
    )
    gates = (
        GateSpec(node=1, r_gate=1.0, r_out=0.5, gate_threshold=1e3),
        GateSpec(node=2, r_gate=1.3, r_out=0.5, gate_threshold=1e3),
    )
    return DeviceConfig(
        branches=branches,
        gates=gates,
        theta0=0.0,
        phi0=1.0,
        units="normalized",
        output_node=3,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
