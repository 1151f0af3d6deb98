"""Linearized solver: currents, critical lines, envelope evaluation.

The critical-condition lines are cross-checked against hand-derived
closed forms (transcribed independently below) so the network-assembly
route and the textbook algebra must agree to rounding error.
"""
import dataclasses
import math

import numpy as np
import pytest

from squidgate.circuit import BranchSpec, DeviceConfig, Drive
from squidgate.errors import SolverError
from squidgate.linear import (
    affine_model,
    critical_current,
    critical_current_grid,
    critical_lines,
    gate_critical_input,
    gate_current,
    gate_input_bounds,
    internal_currents_closed,
    internal_currents_generic,
    is_superconducting,
    state_residuals,
)

from conftest import make3, make_double_gated, random_config


# ---------------------------------------------------------------------------
# Independent closed-form line transcriptions (common bare threshold i*).
# Each returns (slope, intercept) of i_in versus (phi_ext + m*phi0).
# ---------------------------------------------------------------------------

def _params(config):
    l1, l2, l3 = (b.inductance for b in config.branches)
    g = config.gates[0]
    s = g.r_gate + g.r_out
    d = l1 + l2 + l3
    istar = config.branches[0].critical_current
    shift = (config.resolved_theta0() / (2 * math.pi)) * config.phi0
    return l1, l2, l3, g, s, d, istar, shift


def line1_wide(config, vg):
    l1, l2, l3, g, s, d, istar, shift = _params(config)
    den = l2 * g.r_out + l3 * s
    a = -s / den
    b = (d * s * istar + l2 * vg - s * shift) / den
    return a, b


def line2_wide(config, vg):
    l1, l2, l3, g, s, d, istar, shift = _params(config)
    den = l3 * g.r_gate - l1 * g.r_out
    a = -s / den
    b = (d * s * istar - (l1 + l3) * vg - s * shift) / den
    return a, b


def line3_wide(config, vg):
    l1, l2, l3, g, s, d, istar, shift = _params(config)
    den = l2 * g.r_gate + l1 * s
    a = s / den
    b = (d * s * istar - l2 * vg + s * shift) / den
    return a, b


def line1_narrow(config, vg):
    l1, l2, l3, g, s, d, istar, shift = _params(config)
    alpha = g.coupling_alpha
    den = l2 * g.r_out + l3 * s - alpha * d * g.r_out
    a = -s / den
    b = (d * s * istar - (alpha * d - l2) * vg - s * shift) / den
    return a, b


def line2_narrow(config, vg):
    l1, l2, l3, g, s, d, istar, shift = _params(config)
    alpha = g.coupling_alpha
    den = l3 * g.r_gate - (l1 + alpha * d) * g.r_out
    a = -s / den
    b = (d * s * istar - (l1 + l3 + alpha * d) * vg - s * shift) / den
    return a, b


class TestGateCurrent:
    def test_zero_drive(self):
        config = make3()
        assert gate_current(config, Drive(v_gate=(0.0,))) == 0.0

    def test_reference_value(self):
        config = make3(r_gate=1000.0, r_out=570.0)
        i_g = gate_current(config, Drive(i_in=0.0, v_gate=(10e-3,)))
        assert i_g == pytest.approx(6.3694e-6, rel=1e-4)

    def test_numerator_cancellation(self):
        config = make3()
        i_in = 0.8
        v = config.gates[0].r_out * i_in
        assert gate_current(config, Drive(i_in=i_in, v_gate=(v,))) == pytest.approx(0.0, abs=1e-15)


class TestGateCriticalInput:
    def test_zero_gate_voltage(self):
        config = make3(gate_threshold=5e-6, r_gate=1000.0, r_out=570.0)
        expected = -5e-6 * 570.0 / 1570.0
        assert gate_critical_input(config, 0.0) == pytest.approx(expected, rel=1e-12)

    def test_reference_value(self):
        config = make3(gate_threshold=5e-6, r_gate=1000.0, r_out=570.0)
        got = gate_critical_input(config, 10e-3)
        assert got == pytest.approx((10e-3 - 5e-6 * 570.0) / 1570.0, rel=1e-12)
        assert got == pytest.approx(4.554e-6, rel=1e-3)

    def test_huge_threshold_never_binds(self):
        generous = make3(gate_threshold=1e9)
        modest = make3(gate_threshold=1e6)
        phi = 0.23
        a = critical_current(generous, phi, v_gate=(1.5,))
        b = critical_current(modest, phi, v_gate=(1.5,))
        assert a.i_c == pytest.approx(b.i_c, rel=1e-12)
        assert not a.gate_limited

    def test_band_contains_si8_regime(self):
        config = make3(gate_threshold=0.05)
        lo, hi = gate_input_bounds(config, 1.5)
        assert lo < hi
        i_g_at_hi = gate_current(config, Drive(i_in=hi, v_gate=(1.5,)))
        assert abs(i_g_at_hi) == pytest.approx(config.gates[0].gate_threshold, rel=1e-12)


class TestInternalCurrents:
    def test_equal_inductance_half_quantum(self):
        config = make3(inductances=(1.0, 1.0, 1.0))
        state = internal_currents_closed(
            config, Drive(i_in=0.0, v_gate=(0.0,), phi_ext=0.5), m=0
        )
        # circulating current phi0/(6 L); all three branches carry it equally
        expected = 0.5 / 3.0
        for cur in state.currents:
            assert cur == pytest.approx(expected, rel=1e-12)

    def test_zero_drive_zero_currents(self):
        config = make3()
        state = internal_currents_closed(config, Drive(v_gate=(0.0,)), m=0)
        assert all(abs(c) < 1e-15 for c in state.currents)

    def test_fluxon_and_flux_shift_cancel(self):
        config = make3(theta0=0.4)
        drive_a = Drive(i_in=0.2, v_gate=(0.3,), phi_ext=0.37)
        drive_b = Drive(i_in=0.2, v_gate=(0.3,), phi_ext=0.37 - config.phi0)
        state_a = internal_currents_closed(config, drive_a, m=0)
        state_b = internal_currents_closed(config, drive_b, m=1)
        assert state_a.currents == pytest.approx(state_b.currents, rel=1e-12)

    def test_generic_matches_closed_form(self, rng):
        for _ in range(300):
            config = random_config(rng, equal_ic=False, random_theta0=True)
            drive = Drive(
                i_in=rng.uniform(-2, 2),
                v_gate=(rng.uniform(-1, 1),),
                phi_ext=rng.uniform(-3, 3),
            )
            m = int(rng.integers(-3, 4))
            a = internal_currents_closed(config, drive, m)
            b = internal_currents_generic(config, drive, m)
            scale = max(abs(x) for x in a.currents) + 1e-30
            for x, y in zip(a.currents, b.currents):
                assert abs(x - y) <= 1e-10 * scale

    def test_state_residuals_small(self, rng):
        for _ in range(50):
            config = random_config(rng, random_theta0=True)
            drive = Drive(
                i_in=rng.uniform(-2, 2),
                v_gate=(rng.uniform(-1, 1),),
                phi_ext=rng.uniform(-3, 3),
            )
            state = internal_currents_generic(config, drive, int(rng.integers(-2, 3)))
            kcl, quant = state_residuals(config, drive, state)
            scale = max(abs(c) for c in state.currents) + 1e-30
            assert kcl <= 1e-10 * scale
            assert quant <= 1e-10

    def test_double_gated_homogeneous(self):
        config = make_double_gated()
        state = internal_currents_generic(config, Drive(v_gate=(0.0, 0.0)), m=0)
        assert all(abs(c) < 1e-15 for c in state.currents)
        assert all(abs(g) < 1e-15 for g in state.gate_currents)

    def test_double_gated_superposition(self, rng):
        config = make_double_gated()
        d1 = Drive(i_in=0.4, v_gate=(0.2, -0.1), phi_ext=0.7)
        d2 = Drive(i_in=-0.6, v_gate=(0.05, 0.3), phi_ext=-0.2)
        mid = Drive(
            i_in=0.5 * (d1.i_in + d2.i_in),
            v_gate=tuple(0.5 * (a + b) for a, b in zip(d1.v_gate, d2.v_gate)),
            phi_ext=0.5 * (d1.phi_ext + d2.phi_ext),
        )
        s1 = internal_currents_generic(config, d1, m=1)
        s2 = internal_currents_generic(config, d2, m=1)
        sm = internal_currents_generic(config, mid, m=1)
        for a, b, c in zip(s1.currents, s2.currents, sm.currents):
            assert 0.5 * (a + b) == pytest.approx(c, rel=1e-12, abs=1e-14)

    def test_affine_in_each_knob(self, rng):
        config = random_config(rng)
        model = affine_model(config)

        def currents(i_in, v, phi, m):
            return np.asarray(
                internal_currents_generic(
                    config, Drive(i_in=i_in, v_gate=(v,), phi_ext=phi), m
                ).currents
            )

        base = (0.3, 0.2, 0.1, 0)
        for axis, delta in (("i_in", 0.7), ("v", 0.4), ("phi", 1.1), ("m", 2)):
            args0 = dict(zip(("i_in", "v", "phi", "m"), base))
            args1 = dict(args0)
            args2 = dict(args0)
            args1[axis] = args0[axis] + delta
            args2[axis] = args0[axis] + 2 * delta
            c0, c1, c2 = (currents(**a) for a in (args0, args1, args2))
            assert c2 - c1 == pytest.approx(c1 - c0, rel=1e-10, abs=1e-13)
        assert model.c.shape == (3,)

    def test_degenerate_system_raises(self):
        branches = tuple(
            BranchSpec(index=i + 1, inductance=0.0, critical_current=1.0)
            for i in range(3)
        )
        config = DeviceConfig(branches=branches, gates=(), phi0=1.0, units="normalized")
        with pytest.raises(SolverError) as err:
            affine_model(config)
        assert "equations" in err.value.context


class TestCriticalLines:
    @pytest.mark.parametrize("branch,oracle", [(1, line1_wide), (2, line2_wide), (3, line3_wide)])
    def test_wide_lines_match_transcription(self, rng, branch, oracle):
        for _ in range(100):
            config = random_config(rng, random_theta0=True)
            vg = rng.uniform(-1.0, 1.0)
            lines = critical_lines(config, range(-2, 3), v_gate=(vg,), mode="wide")
            got = lines.primary[branch]
            a, b = oracle(config, vg)
            assert got.a == pytest.approx(a, rel=1e-12)
            assert got.b == pytest.approx(b, rel=1e-12)

    @pytest.mark.parametrize("branch,oracle", [(1, line1_narrow), (2, line2_narrow)])
    def test_narrow_lines_match_transcription(self, rng, branch, oracle):
        for _ in range(100):
            config = random_config(rng, narrow=True)
            vg = rng.uniform(0.2, 1.0)
            lines = critical_lines(config, range(-2, 3), v_gate=(vg,), mode="narrow")
            got = lines.primary[branch]
            a, b = oracle(config, vg)
            assert got.a == pytest.approx(a, rel=1e-12)
            assert got.b == pytest.approx(b, rel=1e-12)

    def test_alpha_zero_reduction(self, rng):
        for _ in range(50):
            config = random_config(rng)  # alpha == 0
            vg = rng.uniform(-1.0, 1.0)
            wide = critical_lines(config, range(-1, 2), v_gate=(vg,), mode="wide")
            narrow = critical_lines(config, range(-1, 2), v_gate=(vg,), mode="narrow")
            for branch in (1, 2, 3):
                w, n = wide.primary[branch], narrow.primary[branch]
                assert n.a == pytest.approx(w.a, rel=1e-12)
                assert n.b == pytest.approx(w.b, rel=1e-12)

    def test_lines_shift_by_one_quantum_per_fluxon(self):
        config = make3()
        lines = critical_lines(config, range(-2, 3), v_gate=(0.4,))
        for branch in (1, 2, 3):
            line = lines.primary[branch]
            phi = 0.21
            assert line.value(phi, m=1, phi0=config.phi0) == pytest.approx(
                line.value(phi + config.phi0, m=0, phi0=config.phi0), rel=1e-12
            )

    def test_gate_voltage_translates_lines_1_and_3(self):
        config = make3()
        g = config.gates[0]
        dv = 0.35
        shift = config.branches[1].inductance * dv / (g.r_gate + g.r_out)
        for branch in (1, 3):
            base = critical_lines(config, [0], v_gate=(0.0,)).primary[branch]
            moved = critical_lines(config, [0], v_gate=(dv,)).primary[branch]
            assert moved.a == pytest.approx(base.a, rel=1e-12)
            phi = 0.4
            assert moved.value(phi, 0, config.phi0) == pytest.approx(
                base.value(phi - shift, 0, config.phi0), rel=1e-12
            )

    def test_vertical_line_flagged(self):
        # branch-2 wide denominator l3*r_gate - l1*r_out vanishes at l3 = l1*r
        config = make3(inductances=(2.0, 1.0, 2.0 * 0.57), r_gate=1.0, r_out=0.57)
        lines = critical_lines(config, [0], v_gate=(0.2,), mode="wide")
        assert lines.primary[2].vertical
        assert math.isfinite(lines.primary[2].phi_vertical)
        assert not lines.primary[1].vertical


class TestSuperconductingClassification:
    def test_zero_drive_superconducting(self):
        ok, m = is_superconducting(make3(), Drive(v_gate=(0.0,)))
        assert ok and m == 0

    def test_far_above_thresholds_normal(self):
        config = make3()
        total = sum(b.critical_current for b in config.branches)
        ok, m = is_superconducting(config, Drive(i_in=10 * total, v_gate=(0.0,)))
        assert not ok and m is None

    def test_boundary_classifies_normal(self):
        config = make3()
        phi = 0.2
        point = critical_current(config, phi, v_gate=(1.5,))
        at = Drive(i_in=point.i_c, v_gate=(1.5,), phi_ext=phi)
        below = Drive(i_in=point.i_c * (1 - 1e-9), v_gate=(1.5,), phi_ext=phi)
        assert is_superconducting(config, at)[0] is False
        assert is_superconducting(config, below)[0] is True


class TestCriticalCurrent:
    def test_periodicity(self, rng):
        for _ in range(10):
            config = random_config(rng, random_theta0=True)
            vg = rng.uniform(0.0, 1.0)
            phi = rng.uniform(-2, 2, size=20)
            a, _, _, _ = critical_current_grid(config, phi, v_gate=(vg,))
            b, _, _, _ = critical_current_grid(config, phi + config.phi0, v_gate=(vg,))
            assert np.allclose(a, b, rtol=1e-10)

    def test_translation_property_wide(self):
        # branch 2 made non-binding so branches 1 and 3 set the envelope
        config = make3(inductances=(1.0, 1.0, 2.0))
        config = dataclasses.replace(
            config,
            branches=(
                config.branches[0],
                dataclasses.replace(config.branches[1], critical_current=50.0),
                config.branches[2],
            ),
        )
        g = config.gates[0]
        vg = 0.8
        shift = config.branches[1].inductance * vg / (g.r_gate + g.r_out)
        for phi in np.linspace(-1.0, 1.0, 17):
            with_gate = critical_current(config, phi, v_gate=(vg,)).i_c
            reference = critical_current(config, phi - shift, v_gate=(0.0,)).i_c
            assert with_gate == pytest.approx(reference, rel=1e-10)

    def test_gate_plateau_when_threshold_small(self):
        config = make3(gate_threshold=0.05)
        ic, labels, _, _ = critical_current_grid(
            config, np.linspace(-1, 1, 41), v_gate=(0.0,)
        )
        assert all(lab == "gate" for lab in labels)
        assert np.ptp(ic) <= 1e-12

    def test_exactly_one_binding_constraint_off_vertex(self):
        from squidgate.linear import ConstraintSet

        config = make3()
        phi = 0.137  # generic flux, away from vertices
        point = critical_current(config, phi, v_gate=(1.5,))
        cs = ConstraintSet(config, (1.5,))
        istar = config.branches[0].critical_current
        margins = cs.margins(point.i_c, phi, point.fluxon)
        tight = np.abs(margins) <= 1e-9 * istar
        assert int(np.sum(tight)) == 1

    def test_ungated_segment_slopes(self):
        # ungated loop: the return-branch line rises with 1/(l1+l2) and the
        # input-arm line falls with 1/l3
        branches = tuple(
            BranchSpec(index=i + 1, inductance=l, critical_current=1.0)
            for i, l in enumerate((1.0, 0.5, 2.0))
        )
        config = DeviceConfig(branches=branches, gates=(), phi0=1.0, units="normalized")
        lines = critical_lines(config, [0], v_gate=())
        assert abs(lines.primary[3].a) == pytest.approx(1.0 / (1.0 + 0.5), rel=1e-12)
        assert abs(lines.primary[1].a) == pytest.approx(1.0 / 2.0, rel=1e-12)
