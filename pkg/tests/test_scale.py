import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonon_pairs.scale import (
    ChainCollapseError,
    CollisionModel,
    ConstantWaveform,
    ExpansionModel,
    RampPulse,
    TabulatedWaveform,
    axial_frequency_from_scale,
    collision_scale,
    expansion_scale,
    ion_separation,
    mode_frequency,
    read_waveform_csv,
    solve_scale_ode,
)
from phonon_pairs.trap import MG25, TrapConfig, solve_equilibrium

TWO_PI = 2 * math.pi
W_IN = TWO_PI * 0.2e6


def fd(f, t, h):
    return (f(t + h) - f(t - h)) / (2 * h)


def test_constant_drive_keeps_equilibrium():
    traj = solve_scale_ode(ConstantWaveform(W_IN, 5e-6), W_IN, (0.0, 5e-6))
    assert np.max(np.abs(traj.b - 1)) < 1e-12
    assert np.max(np.abs(traj.b_dot)) < 1e-12 * W_IN


def test_mismatched_initial_frequency_rejected():
    with pytest.raises(ValueError):
        solve_scale_ode(ConstantWaveform(2 * W_IN), W_IN, (0.0, 1e-6))


def test_small_step_matches_linear_response():
    # omega^2 -> w_in^2 (1 + eps): harmonic breathing at sqrt(3 w_in^2 + eps w_in^2) to first order
    eps = 1e-6
    wf = TabulatedWaveform(np.array([-1.0, 0.0, 1e-15, 1.0]), W_IN**2 * np.array([1, 1, 1 + eps, 1 + eps]))
    traj = solve_scale_ode(wf, W_IN, (0.0, 10e-6), rtol=1e-12, atol=1e-15)
    t = np.linspace(0, 10e-6, 50)
    b_eq = 1 - eps / 3
    w_br = math.sqrt(3) * W_IN
    expected = b_eq + (1 - b_eq) * np.cos(w_br * t)
    assert traj.scale(t)[0] == pytest.approx(expected, abs=5e-11)


def test_pulse_compresses_and_residual_small():
    wf = RampPulse(W_IN, TWO_PI * 0.7e6)
    traj = solve_scale_ode(wf, W_IN, (0.0, 3e-6))
    t_min, b_min = traj.minimum()
    assert 0.16 < b_min < 0.18
    assert 0.5e-6 < t_min < 1.0e-6
    ts = np.linspace(0.05e-6, 2.9e-6, 400)
    assert np.median(np.abs(traj.residual(ts))) < 1e-7


def test_pulse_waveform_shape():
    wf = RampPulse(W_IN, TWO_PI * 0.7e6, ramp=0.5e-6, hold=0.5e-6)
    w = np.sqrt(wf.omega_sq(np.array([-1e-6, 0.0, 0.25e-6, 0.5e-6, 0.75e-6, 1.0e-6, 1.5e-6, 2e-6])))
    hi2, lo2 = (TWO_PI * 0.7e6) ** 2, W_IN**2
    assert w[[0, 1, 6, 7]] == pytest.approx([W_IN] * 4, rel=1e-14)
    assert w[[3, 4, 5]] == pytest.approx([TWO_PI * 0.7e6] * 3, rel=1e-14)
    assert w[2] ** 2 == pytest.approx(0.5 * (lo2 + hi2), rel=1e-12)
    assert wf.support() == (0.0, 1.5e-6)


@pytest.mark.parametrize("scale_fn, model", [
    (collision_scale, CollisionModel((TWO_PI * 0.3e6) ** 2, TWO_PI * 0.05e6, W_IN)),
    (expansion_scale, ExpansionModel(-(TWO_PI * 0.3e6) ** 2, TWO_PI * 0.05e6, W_IN)),
    (expansion_scale, ExpansionModel((TWO_PI * 0.15e6) ** 2, TWO_PI * 0.05e6, W_IN)),
])
def test_model_derivatives_match_finite_differences(scale_fn, model):
    t = np.linspace(-30e-6, 30e-6, 41)
    h = 1e-9
    b, bd, bdd = scale_fn(model, t)
    assert bd == pytest.approx(fd(lambda s: scale_fn(model, s)[0], t, h), rel=1e-6, abs=1e-9 * W_IN)
    assert bdd == pytest.approx(fd(lambda s: scale_fn(model, s)[1], t, h), rel=1e-6, abs=1e-9 * W_IN**2)


def test_collision_model_limits():
    m = CollisionModel((TWO_PI * 0.5e6) ** 2, TWO_PI * 0.1e6, W_IN)
    t0, t1 = m.window()
    assert collision_scale(m, 0.0)[0] == pytest.approx(m.b_min, rel=1e-15)
    assert collision_scale(m, np.array([t0, t1]))[0] == pytest.approx([1, 1], abs=1e-12)
    assert m.pole_distance == pytest.approx(math.pi / (2 * m.omega_col))


def test_expansion_model_limits():
    m = ExpansionModel(-(TWO_PI * 0.3e6) ** 2, TWO_PI * 0.1e6, W_IN)
    t0, t1 = m.window()
    b = expansion_scale(m, np.array([t0, t1]))[0]
    assert b == pytest.approx([1.0, m.b_final], abs=1e-12)
    assert m.b_final < 1  # negative (signed) step compresses
    with pytest.raises(ValueError):
        ExpansionModel(W_IN**2, 1.0, W_IN)


def test_collision_scale_complex_argument():
    m = CollisionModel(2 * W_IN**2, W_IN, W_IN)
    t = (0.3 + 0.4j) / W_IN
    b = collision_scale(m, t)[0]
    assert b ** -3 == pytest.approx(1 + 2 / np.cosh(0.3 + 0.4j) ** 2, rel=1e-14)


def test_round_trip_model_to_waveform_to_scale():
    m = CollisionModel((TWO_PI * 0.4e6) ** 2, TWO_PI * 0.1e6, W_IN)
    t0, t1 = m.window()
    wf = axial_frequency_from_scale(m, W_IN, (t0, t1))
    assert not wf.is_repulsive
    traj = solve_scale_ode(wf, W_IN, (t0, t1), rtol=1e-12, atol=1e-14)
    ts = np.linspace(t0, t1, 301)
    assert traj.scale(ts)[0] == pytest.approx(collision_scale(m, ts)[0], abs=1e-8)


def test_fast_collision_needs_repulsive_confinement():
    # a shallow, fast dip (omega_col = 4 omega_ax_in) needs a repulsive axial potential
    m = CollisionModel(0.5 * W_IN**2, 4 * W_IN, W_IN)
    wf = axial_frequency_from_scale(m, W_IN)
    assert wf.is_repulsive
    for a, b in wf.repulsive_intervals:
        assert wf.omega_sq(a) == pytest.approx(0.0, abs=1e-6 * W_IN**2)
        assert wf.omega_sq(0.5 * (a + b)) < 0
    with pytest.raises(ValueError):
        wf.omega(0.5 * sum(wf.repulsive_intervals[0]))


def test_collapse_reported():
    wf = TabulatedWaveform(np.array([0.0, 1e-9, 1e-3]), np.array([W_IN**2, 1e4 * W_IN**2, 1e4 * W_IN**2]))
    with pytest.raises(ChainCollapseError) as info:
        solve_scale_ode(wf, W_IN, (0.0, 20e-6), collapse_floor=0.05)
    assert info.value.time > 0


def test_waveform_csv_round_trip(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("# comment\ntime_s,omega_ax_over_2pi_Hz\n0,200000\n1e-6,400000\n2e-6,200000\n")
    wf = read_waveform_csv(p)
    assert wf.omega_sq(np.array([0.0, 1e-6])) == pytest.approx([W_IN**2, (2 * W_IN) ** 2])
    assert wf.omega_sq(5e-6) == pytest.approx(W_IN**2)  # clamped
    bad = tmp_path / "bad.csv"
    bad.write_text("t,f\n0,1\n1,2\n")
    with pytest.raises(ValueError):
        read_waveform_csv(bad)


def test_separation_and_mode_frequency():
    chain = solve_equilibrium(TrapConfig(MG25, 2, TWO_PI * 3.5e6, W_IN))
    assert ion_separation(chain, 0.5) == pytest.approx(0.5 * chain.separation)
    assert mode_frequency(W_IN**2, TWO_PI * 3.5e6, 1.0) == pytest.approx((TWO_PI * 3.5e6) ** 2 - W_IN**2)
    with pytest.raises(ValueError):
        ion_separation(solve_equilibrium(TrapConfig(MG25, 3, TWO_PI * 3.5e6, W_IN)), 1.0)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.05, 5.0), rate=st.floats(0.05, 0.8))
def test_round_trip_property(a, rate):
    m = CollisionModel(a * W_IN**2, rate * W_IN, W_IN)
    wf = axial_frequency_from_scale(m, W_IN)
    ts = np.linspace(*m.window(), 101)
    b, _, bdd = collision_scale(m, ts)
    # the derived waveform satisfies the scale ODE identically
    resid = bdd + wf.omega_sq(ts) * b - W_IN**2 / b**2
    assert np.max(np.abs(resid)) < 1e-9 * W_IN**2 * (1 + a)
