"""Acceptance suite: one test per release criterion, tolerances pinned.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line
per criterion.  Every tolerance is fixed here, not calibrated elsewhere.
"""
import time

import numpy as np
import pytest

from squidgate import cli
from squidgate.circuit import BranchSpec, DeviceConfig, Drive, PHI0_SI
from squidgate.fitting import (
    alpha_star,
    amplitude_shift_predicted,
    effective_inductance,
    envelope_extrema_predicted,
    fit_parameters,
    phase_shift_measured,
    phase_shift_predicted,
)
from squidgate.linear import (
    critical_current_grid,
    critical_lines,
    internal_currents_closed,
    internal_currents_generic,
)
from squidgate.oracle import (
    compare_linearized,
    exact_critical_current,
    stability_region,
    symmetric_loop,
)
from squidgate.pattern import envelope_stats, sweep_pattern

from conftest import make3, make_si_device, random_config
from test_linear import line1_narrow, line1_wide, line2_narrow, line2_wide


def _report(number: int, text: str) -> None:
    print(f"[PASS] criterion {number:2d}: {text}", flush=True)


def test_c01_reduction_identity_alpha_zero(rng):
    started = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        config = random_config(rng, random_theta0=True)  # coupling_alpha == 0
        vg = rng.uniform(-1.0, 1.0)
        wide = critical_lines(config, range(-1, 2), v_gate=(vg,), mode="wide")
        narrow = critical_lines(config, range(-1, 2), v_gate=(vg,), mode="narrow")
        oracles = {
            1: (line1_wide(config, vg), line1_narrow(config, vg)),
            2: (line2_wide(config, vg), line2_narrow(config, vg)),
        }
        for branch in (1, 2, 3):
            w, n = wide.primary[branch], narrow.primary[branch]
            for got, want in ((n.a, w.a), (n.b, w.b)):
                worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
            if branch in oracles:
                (a_w, b_w), (a_n, b_n) = oracles[branch]
                assert a_w == pytest.approx(a_n, rel=1e-12)
                assert b_w == pytest.approx(b_n, rel=1e-12)
                assert n.a == pytest.approx(a_n, rel=1e-12)
                assert n.b == pytest.approx(b_n, rel=1e-12)
    elapsed = time.perf_counter() - started
    assert worst <= 1e-12
    assert elapsed < 1.0
    _report(1, f"narrow lines at alpha=0 equal wide lines (worst rel {worst:.2e}, {elapsed:.2f}s)")


def test_c02_generic_matches_closed_forms(rng):
    started = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        config = random_config(rng, equal_ic=False, random_theta0=True)
        drive = Drive(
            i_in=rng.uniform(-2, 2),
            v_gate=(rng.uniform(-1, 1),),
            phi_ext=rng.uniform(-3, 3),
        )
        m = int(rng.integers(-3, 4))
        closed = internal_currents_closed(config, drive, m)
        generic = internal_currents_generic(config, drive, m)
        scale = max(abs(x) for x in closed.currents) + 1e-30
        for x, y in zip(closed.currents, generic.currents):
            worst = max(worst, abs(x - y) / scale)
    elapsed = time.perf_counter() - started
    assert worst <= 1e-10
    assert elapsed < 5.0
    _report(2, f"network solve matches closed forms over 1000 devices "
               f"(worst rel {worst:.2e}, {elapsed:.2f}s)")


def test_c03_flux_periodicity(rng):
    worst = 0.0
    for _ in range(10):
        config = random_config(rng, random_theta0=True)
        vg = rng.uniform(0.0, 1.2)
        phi = rng.uniform(-2.0, 2.0, size=100)
        a, _, _, _ = critical_current_grid(config, phi, (vg,))
        b, _, _, _ = critical_current_grid(config, phi + config.phi0, (vg,))
        worst = max(worst, float(np.max(np.abs(a - b) / np.abs(a))))
    assert worst <= 1e-10
    _report(3, f"critical current is flux-periodic (worst rel {worst:.2e})")


def test_c04_phase_shift_law():
    # wide-gate SI device; middle branch threshold is slack so branches 1
    # and 3 bind and the pattern translates rigidly with gate voltage
    config = make_si_device()
    gate = config.gates[0]
    v_hi = 5e-3
    predicted = config.branches[1].inductance * v_hi / (gate.r_gate + gate.r_out)
    assert predicted == pytest.approx(phase_shift_predicted(config, v_hi), rel=1e-14)
    span = (-1.5 * PHI0_SI, 1.5 * PHI0_SI)
    pattern_0 = sweep_pattern(config, span, 1201, v_gate=(0.0,))
    pattern_v = sweep_pattern(config, span, 1201, v_gate=(v_hi,))
    measured = phase_shift_measured(pattern_0, pattern_v)
    assert abs(measured - predicted) <= 0.01 * PHI0_SI
    _report(4, f"pattern translation {measured / PHI0_SI:.4f} phi0 matches "
               f"L2*Vg/(Rg+Rout) = {predicted / PHI0_SI:.4f} phi0 within 1%")


def test_c05_zigzag_slope_law():
    branches = tuple(
        BranchSpec(index=i + 1, inductance=1.0, critical_current=1.0)
        for i in range(3)
    )
    config = DeviceConfig(branches=branches, gates=(), phi0=1.0, units="normalized")
    pattern = sweep_pattern(config, (-1.5, 1.5), 301, v_gate=())
    stats = envelope_stats(pattern)
    # characteristic zigzag slope: peak-to-peak modulation per flux quantum
    slope = stats.modulation_depth / config.phi0
    expected = 1.0 / sum(b.inductance for b in branches)
    assert slope == pytest.approx(expected, rel=1e-3)
    _report(5, f"ungated zigzag slope {slope:.6f} equals 1/(L1+L2+L3) = "
               f"{expected:.6f} within 0.1%")


def test_c06_oracle_convergence():
    started = time.perf_counter()
    phis = np.linspace(-0.5, 0.5, 81)
    errors = {}
    for beta in (5.0, 20.0, 100.0):
        report = compare_linearized(symmetric_loop(beta), phis)
        errors[beta] = report.max_normalized_error
    elapsed = time.perf_counter() - started
    assert errors[100.0] < errors[20.0] < errors[5.0]
    assert errors[100.0] <= 0.02
    assert elapsed < 60.0
    _report(6, "linearized error shrinks with screening: "
               + ", ".join(f"beta={b:g}: {errors[b]:.4f}" for b in (5.0, 20.0, 100.0))
               + f" ({elapsed:.1f}s)")


def test_c07_exact_oracle_sanity():
    loop = symmetric_loop(2.0)
    at_zero = exact_critical_current(loop, 0.0)
    assert at_zero.i_c == pytest.approx(loop.ic1 + loop.ic2, rel=1e-6)
    tiny = symmetric_loop(1e-4)
    at_half = exact_critical_current(tiny, 0.5)
    assert at_half.i_c <= 1e-3 * (tiny.ic1 + tiny.ic2)
    _report(7, f"exact loop: i_c(0) = {at_zero.i_c:.9f} = ic1+ic2; "
               f"i_c(phi0/2) = {at_half.i_c:.2e} at beta=1e-4")


def test_c08_amplitude_shift_consistency(rng):
    checked = 0
    for _ in range(200):
        if checked >= 100:
            break
        r_gate = rng.uniform(0.5, 2.0)
        r = rng.uniform(0.2, 0.9)
        alpha = rng.uniform(0.0, 0.99 / r)
        if alpha * r >= 0.99:
            continue
        config = make3(r_gate=r_gate, r_out=r * r_gate, alpha=alpha)
        v_a, v_b = rng.uniform(0.5, 2.0, size=2)
        max_a, _ = envelope_extrema_predicted(config, v_a)
        max_b, _ = envelope_extrema_predicted(config, v_b)
        predicted = amplitude_shift_predicted(config, v_b) - amplitude_shift_predicted(config, v_a)
        assert max_a - max_b == pytest.approx(predicted, rel=1e-12, abs=1e-300)
        checked += 1
    assert checked == 100
    _report(8, "current-axis shift equals the envelope-maximum difference "
               "(1e-12 relative, 100 random alpha/r)")


def test_c09_zero_inductance_threshold():
    config = make3(inductances=(1.0, 1.0, 2.0), r_gate=1.0, r_out=0.57)
    value = alpha_star(config)
    assert value == pytest.approx((2.0 / 0.57 - 1.0) / 4.0, abs=1e-9)
    assert round(value, 4) == 0.6272
    at_star = make3(inductances=(1.0, 1.0, 2.0), r_gate=1.0, r_out=0.57, alpha=value)
    pattern = sweep_pattern(at_star, (-1.5, 1.5), 201, v_gate=(1.5,))
    vertical = [v for v in pattern.vertices if v.vertical]
    assert vertical
    result = effective_inductance(pattern, vertical[0].phi)
    assert result.zero_inductance
    _report(9, f"alpha* = {value:.10f}; envelope at alpha* carries a "
               f"zero-inductance step at phi = {vertical[0].phi:.4f}")


def test_c10_gate_cutoff_flattens_pattern():
    config = make3(gate_threshold=0.05)
    phi = np.linspace(-1.5, 1.5, 121)
    ic, labels, _, _ = critical_current_grid(config, phi, (0.0,))
    assert all(label == "gate" for label in labels)
    assert float(np.ptp(ic)) <= 1e-12
    # the same device with a generous gate shows full interference
    open_gate = make3(gate_threshold=1e3)
    ic_open, labels_open, _, _ = critical_current_grid(open_gate, phi, (0.0,))
    assert float(np.ptp(ic_open)) > 0.1
    assert not any(label == "gate" for label in labels_open)
    _report(10, "starved gate clips every flux point (label 'gate', flat envelope)")


def test_c11_fit_recovery():
    started = time.perf_counter()
    truth = make3(inductances=(1.0, 1.1, 2.0), alpha=0.3, theta0=2.0)
    phi = np.linspace(-1.0, 1.0, 200)  # two flux periods
    clean, _, _, _ = critical_current_grid(truth, phi, (1.5,))
    noise = np.random.default_rng(321)
    data = clean * (1.0 + 0.01 * noise.standard_normal(phi.size))
    template = make3(inductances=(1.0, 0.9, 2.0), alpha=0.2, theta0=1.2)
    bounds = {"L2": (0.6, 1.8), "alpha": (0.05, 0.55), "theta0": (0.5, 3.0)}

    first = fit_parameters([(phi, data, 1.5)], template, ["L2", "alpha", "theta0"],
                           bounds, seed=11)
    again = fit_parameters([(phi, data, 1.5)], template, ["L2", "alpha", "theta0"],
                           bounds, seed=11)
    elapsed = time.perf_counter() - started
    assert first.params == again.params and first.rms == again.rms
    for name, target in (("L2", 1.1), ("alpha", 0.3), ("theta0", 2.0)):
        assert first.params[name] == pytest.approx(target, rel=0.05)
    assert elapsed < 60.0
    _report(11, "fit recovers L2/alpha/theta0 within 5% from 1%-noise data, "
                f"bit-identical reruns ({elapsed:.1f}s)")


def test_c12_figure_analogues(tmp_path):
    example = str(tmp_path / "device.json")
    narrow = str(tmp_path / "narrow.json")
    from squidgate.circuit import make_gated_squid, save_config

    save_config(make_gated_squid([1.0, 1.0, 2.0], 1.0, r_gate=1.0, r_out=0.57,
                                 gate_threshold=1e3), example)
    save_config(make_gated_squid([1.0, 1.0, 2.0], 1.0, r_gate=1.0, r_out=0.57,
                                 gate_threshold=1e3, coupling_alpha=0.3), narrow)

    zigzag_svg = tmp_path / "zigzag.svg"
    assert cli.main(["sweep", example, "--v-gate", "1.5", "--phi-count", "201",
                     "--plot", str(zigzag_svg)]) == 0
    narrow_svg = tmp_path / "narrow.svg"
    assert cli.main(["sweep", narrow, "--v-gate", "1.5", "--phi-count", "201",
                     "--plot", str(narrow_svg)]) == 0
    oracle_svg = tmp_path / "oracle.svg"
    assert cli.main(["oracle", "--beta-l", "2", "--phi-count", "61",
                     "--plot", str(oracle_svg), "--lobes"]) == 0
    for path in (zigzag_svg, narrow_svg, oracle_svg):
        text = path.read_text()
        assert text.lstrip().startswith("<?xml") and "<svg" in text[:500]

    # the rendered zigzag really is a zigzag: alternating vertex types
    cfg = make3()
    pattern = sweep_pattern(cfg, (-1.5, 1.5), 201, v_gate=(1.5,))
    assert len(pattern.vertices) >= 4
    kinds = [v.labels for v in pattern.vertices]
    assert all(a != b for a, b in zip(kinds[:-1], kinds[1:]))

    # narrow gate moves the envelope down: amplitude tunability
    lo = envelope_stats(sweep_pattern(make3(alpha=0.3), (-1.5, 1.5), 51, v_gate=(1.4,)))
    hi = envelope_stats(sweep_pattern(make3(alpha=0.3), (-1.5, 1.5), 51, v_gate=(1.6,)))
    assert hi.max_ic < lo.max_ic

    # the beta=2 overlay really shows overlapping stability lobes
    loop = symmetric_loop(2.0)
    phis = np.linspace(-1.0, 1.0, 41)
    r0 = stability_region(loop, 0, phis)
    r1 = stability_region(loop, 1, phis)
    both = r0.exists & r1.exists
    overlap = both & (np.minimum(r0.i_upper, r1.i_upper)
                      > np.maximum(r0.i_lower, r1.i_lower))
    assert np.any(overlap)
    _report(12, "CLI renders zigzag, narrow-gate and exact-overlay figures; "
                "per-fluxon lobes overlap at beta=2")
