import dataclasses
import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from tunnelctl import (
    AU_TIME_FS,
    ControlPolicy,
    Grid1D,
    PotentialModel,
    PropagationConfig,
    PulseSequence,
    PulseSpec,
    WaveFunction,
    four_state_levels,
    four_state_schedule,
    fs_to_au,
    gaussian,
    lct_field,
    localized_pair,
    pi_pulse_amplitude,
    propagate,
    seed_initial_state,
)
from tunnelctl.control import boost, ground_pair_schedule, odd_area_duration, pulse_value
from tunnelctl.errors import ForbiddenTransitionError, GridMismatchError, ScheduleError

from conftest import random_state
from oracles import two_level_inversion


def ho_pair(grid, omega=0.5):
    """Harmonic ground and first excited states; <g|z|e> = 1/sqrt(2 omega)."""
    x = grid.x
    g = (omega / np.pi) ** 0.25 * np.exp(-omega * x**2 / 2)
    e = np.sqrt(2 * omega) * x * g
    return WaveFunction(g.astype(complex), grid), WaveFunction(e.astype(complex), grid)


@pytest.fixture(scope="module")
def levels_r20():
    return four_state_levels(20.0, Grid1D(1024, -80.0, 80.0))


class TestLctField:
    def test_two_level_algebra(self, grid_small):
        g, e = ho_pair(grid_small)
        psi = WaveFunction((g.amplitudes + 1j * e.amplitudes) / np.sqrt(2), grid_small)
        for lam in (0.2, -2.8):
            assert lct_field(psi, ControlPolicy(lam, e, e_max=1e6)) == pytest.approx(lam / 2, abs=1e-12)

    def test_target_reached_gives_zero(self, grid_small):
        _, e = ho_pair(grid_small)
        assert lct_field(e, ControlPolicy(-0.2, e)) == pytest.approx(0.0, abs=1e-15)

    def test_dead_seed_gives_zero(self, grid_small):
        g, e = ho_pair(grid_small)
        assert abs(lct_field(g, ControlPolicy(-0.2, e))) < 1e-14

    def test_linear_in_lambda(self, grid_small, rng):
        psi = random_state(grid_small, rng)
        _, e = ho_pair(grid_small)
        f1 = lct_field(psi, ControlPolicy(1.0, e, e_max=1e6))
        for lam in (-3.0, 0.2, 7.5):
            assert lct_field(psi, ControlPolicy(lam, e, e_max=1e6)) == pytest.approx(lam * f1, rel=1e-12)

    def test_clipped_at_e_max(self, grid_small):
        g, e = ho_pair(grid_small)
        psi = WaveFunction((g.amplitudes + 1j * e.amplitudes) / np.sqrt(2), grid_small)
        assert lct_field(psi, ControlPolicy(10.0, e, e_max=0.1)) == 0.1
        assert lct_field(psi, ControlPolicy(-10.0, e, e_max=0.1)) == -0.1

    def test_grid_mismatch(self, grid_small, grid_full):
        _, e = ho_pair(grid_small)
        with pytest.raises(GridMismatchError):
            lct_field(gaussian(grid_full, 0, 1), ControlPolicy(0.2, e))

    @pytest.mark.parametrize("kw", [{"seed": 0.05}, {"seed": -0.1}, {"e_max": 0.0}])
    def test_policy_invariants(self, grid_small, kw):
        _, e = ho_pair(grid_small)
        with pytest.raises(ValueError):
            ControlPolicy(0.2, e, **kw)


class TestSeed:
    def test_zero_fraction_is_identity(self, grid_small):
        g, e = ho_pair(grid_small)
        out = seed_initial_state(g, e, 0.0)
        assert np.array_equal(out.amplitudes, g.amplitudes)

    def test_target_population(self, grid_small):
        from tunnelctl.analysis import target_projection

        g, e = ho_pair(grid_small)
        out = seed_initial_state(g, e, 0.003)
        assert target_projection(out, e) == pytest.approx(0.003, abs=1e-10)
        assert out.norm2() == pytest.approx(1.0, abs=1e-12)

    def test_non_orthogonal_warns(self, grid_small):
        g = gaussian(grid_small, 0.0, 1.0)
        with pytest.warns(UserWarning, match="non-orthogonal"):
            seed_initial_state(g, gaussian(grid_small, 0.5, 1.0), 0.003)

    def test_boost_shifts_momentum(self, grid_full):
        from tunnelctl import momentum_expectation

        psi = boost(gaussian(grid_full, -10, 1.0), 0.001)
        assert momentum_expectation(psi) == pytest.approx(0.001, abs=1e-9)


class TestPulses:
    def test_endpoints_exactly_zero(self):
        spec = PulseSpec(0.02, 0.39, 800.0, 100.0)
        assert pulse_value(spec, 100.0) == 0.0
        assert pulse_value(spec, 900.0) == 0.0

    def test_peak(self):
        tau = 4 * np.pi / 0.5  # omega * tau / 2 = 2 pi
        spec = PulseSpec(0.02, 0.5, tau, 3.0)
        assert pulse_value(spec, 3.0 + tau / 2) == pytest.approx(0.02, abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(st.one_of(st.floats(-1e6, 99.999), st.floats(900.001, 1e6)))
    def test_zero_outside_support(self, t):
        spec = PulseSpec(0.02, 0.39, 800.0, 100.0, phase=0.7)
        assert pulse_value(spec, t) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.0, 2000.0))
    def test_sequence_is_linear(self, t):
        a = PulseSpec(0.02, 0.39, 800.0, 0.0)
        b = PulseSpec(0.01, 0.2, 500.0, 600.0, phase=1.0)
        assert PulseSequence((a, b))(t) == pytest.approx(a(t) + b(t), abs=1e-16)

    def test_continuous_at_endpoints(self):
        spec = PulseSpec(0.02, 0.39, 800.0, 100.0)
        assert abs(pulse_value(spec, 100.0 + 1e-6)) < 1e-15
        assert abs(pulse_value(spec, 900.0 - 1e-6)) < 1e-15

    def test_vectorized(self):
        spec = PulseSpec(0.02, 0.39, 800.0)
        t = np.linspace(-10, 810, 50)
        assert np.allclose(pulse_value(spec, t), [pulse_value(spec, x) for x in t])

    def test_serialization_round_trip(self):
        seq = PulseSequence((PulseSpec(0.02, 0.39, 800.0), PulseSpec(0.02, 0.39, 300.0, 2000.0, 0.1)))
        assert PulseSequence.from_list(seq.to_list()) == seq

    def test_bad_duration(self):
        with pytest.raises(ValueError):
            PulseSpec(0.02, 0.39, 0.0)


class TestPiPulse:
    def test_formula_identity(self):
        assert pi_pulse_amplitude(1.0, 2 * np.pi) == pytest.approx(1.0, abs=1e-15)

    def test_forbidden(self):
        with pytest.raises(ForbiddenTransitionError):
            pi_pulse_amplitude(0.0, 100.0)
        with pytest.raises(ForbiddenTransitionError):
            odd_area_duration(0.0, 0.02, 100.0)

    def test_odd_area_duration(self):
        tau, m = odd_area_duration(1.0, 0.02, 900.0)
        assert m % 2 == 1
        assert 1.0 * 0.02 * tau / 2 == pytest.approx(m * np.pi)

    @pytest.mark.xfail(strict=True, reason="the same-well dipole at R=20 predicts about 0.0073 a.u.")
    def test_r20_prediction_near_nominal_amplitude(self, levels_r20):
        a = pi_pulse_amplitude(levels_r20.dipole_left, fs_to_au(20.0))
        assert a == pytest.approx(0.02, rel=0.5)

    def test_predicted_pi_pulse_inverts_two_level_pair(self, levels_r20):
        tau = fs_to_au(20.0)
        mu = levels_r20.dipole_left
        a = pi_pulse_amplitude(mu, tau)
        pop = two_level_inversion(mu, a, levels_r20.omega, tau, 0.0, levels_r20.omega, n_steps=4000)
        assert pop >= 0.95


class TestFourState:
    def test_levels(self, levels_r20):
        assert levels_r20.omega == pytest.approx(0.39, abs=0.01)
        assert abs(levels_r20.dipole_left) == pytest.approx(abs(levels_r20.dipole_right), rel=1e-6)
        assert abs(levels_r20.dipole_left) > 0.5

    def test_schedule_values(self, levels_r20):
        sched = four_state_schedule(levels_r20)
        pump, dump = sched.sequence.pulses
        info = sched.info
        assert pump.start == 0.0 and pump.amplitude == dump.amplitude == 0.02
        assert pump.omega == dump.omega == pytest.approx(0.39, abs=0.01)
        assert info["pump_duration_fs"] == pytest.approx(20.0, rel=0.15)
        assert info["dump_duration_fs"] == pytest.approx(10.0, rel=0.3)
        assert info["pump_area_pi"] % 2 == 1 and info["dump_area_pi"] % 2 == 1
        assert info["delay_fs"] == pytest.approx(250.0, rel=0.25)
        assert dump.start == pytest.approx(pump.end + levels_r20.t2.time_au)

    def test_schedule_span(self, levels_r20):
        span_fs = four_state_schedule(levels_r20).end * AU_TIME_FS
        assert span_fs == pytest.approx(330.0, rel=0.1)

    def test_pi_amplitude_mode(self, levels_r20):
        sched = four_state_schedule(levels_r20, amplitude=None)
        pump, dump = sched.sequence.pulses
        assert abs(levels_r20.dipole_left) * pump.amplitude * pump.duration / 2 == pytest.approx(math.pi)
        assert dump.duration == pytest.approx(fs_to_au(10.0))

    def test_undefined_delay(self, levels_r20):
        with pytest.raises(ScheduleError):
            four_state_schedule(dataclasses.replace(levels_r20, t2=None))

    def test_r10_ground_pair_variant(self):
        levels = four_state_levels(10.0, Grid1D(1024, -80.0, 80.0))
        sched = ground_pair_schedule(levels)
        assert sched.sequence.pulses == ()
        assert sched.wait * AU_TIME_FS == pytest.approx(100.0, rel=0.25)
        assert sched.end == sched.wait


@pytest.mark.filterwarnings("ignore:seeding non-orthogonal")
def test_lct_monotone_on_r10(grid_full):
    """Target population never drops by more than 1e-4 per step while the field is below the cap."""
    model = PotentialModel(10.0, -5e-3)
    with pytest.warns(UserWarning, match="overlap"):
        pair = localized_pair(model, grid_full, "ground", route="tilted")
    policy = ControlPolicy(-0.2, pair.right.state, e_max=0.1)
    psi0 = seed_initial_state(boost(pair.left.state, 0.001), pair.right.state, 0.003)
    cfg = PropagationConfig(dt=0.01, t_final=fs_to_au(5.0), record_stride=1)
    _, trace = propagate(psi0, model(grid_full.x), cfg, policy, pair.right.state)
    p = np.asarray(trace.p_target)
    e = np.abs(np.asarray(trace.field_history))
    steps = np.diff(p)
    free = e < policy.e_max
    assert steps[free].min() > -1e-4
    assert p[-1] > p[0]
