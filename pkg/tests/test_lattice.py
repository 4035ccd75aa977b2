import math

import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from chipgravity import ConfigurationError, DivergenceError
from chipgravity.circuit import FluxProfile, SquidArrayParams, lattice_group_velocity
from chipgravity.lattice import (LatticeModel, LatticeState, SimConfig, WavePacketSpec, evolve,
                                 evolve_with_front, init_wavepacket, injected_power, shadow_energy,
                                 standing_mode, standing_mode_frequency, step_lattice, total_energy,
                                 total_energy_lattice, track_standing_mode)


def array(n, cj=1e-16):
    return SquidArrayParams(5e-6, 1e-15, cj, 1e-6, n)


@pytest.mark.parametrize("with_cj", [False, True])
def test_standing_mode_frequency(with_cj):
    params = array(128)
    sim = SimConfig(mode="harmonic", dt=0.02, boundary="fixed", include_junction_capacitance=with_cj)
    bias = FluxProfile(0.0, 0.0, floor=0.1)
    model = LatticeModel(params, bias, sim)
    expected = standing_mode_frequency(9, params, sim, 0.1)
    track = track_standing_mode(model, standing_mode(9, 1e-3, params), 9, 100, expected=expected)
    assert abs(track.frequency / expected - 1) < 1e-3
    assert track.times[-1] * expected / (2 * math.pi) == pytest.approx(100, rel=1e-2)


@pytest.mark.parametrize("boundary", ["fixed", "periodic"])
@pytest.mark.parametrize("with_cj", [False, True])
def test_shadow_energy_conserved(boundary, with_cj):
    params = array(512)
    sim = SimConfig(mode="harmonic", dt=0.05, boundary=boundary, include_junction_capacitance=with_cj)
    model = LatticeModel(params, FluxProfile(0.0, 0.0, floor=0.15), sim)
    state = init_wavepacket(WavePacketSpec(0.6, 20.0, 1e-3, 256.0), params, sim, bias=0.15)
    s0 = shadow_energy(state, model)
    final = model.run(state, 10_000)
    assert abs(shadow_energy(final, model) / s0 - 1) < 1e-8
    # the physical energy only oscillates at O(h^2)
    assert abs(total_energy_lattice(final, model) / total_energy_lattice(state, model) - 1) < 1e-3


def test_harmonic_matches_cosine_at_small_amplitude():
    params = array(1024)
    harm = SimConfig(mode="harmonic", dt=0.02, boundary="fixed")
    cos = SimConfig(mode="full_cosine", dt=0.02, boundary="fixed")
    state = init_wavepacket(WavePacketSpec(0.3, 30.0, 1e-3, 400.0), params, harm)
    a = evolve(state, params, None, harm, 5000)
    b = evolve(state, params, None, cos, 5000)
    assert np.max(np.abs(a.phi - b.phi)) / np.max(np.abs(a.phi)) < 1e-4


def test_backward_run_retraces():
    params = array(300)
    prof = FluxProfile(0.2, 0.95, ramp_width=5.0, front_position=100.0)
    sim = SimConfig(mode="full_cosine", dt=0.02, boundary="fixed")
    state = init_wavepacket(WavePacketSpec(0.5, 10.0, 0.05, 150.0), params, sim)
    model = LatticeModel(params, prof, sim)
    phi, p = state.phi[None].copy(), state.p[None].copy()
    t = model.advance(phi, p, 0.0, 2000)
    model.advance(phi, p, t, 2000, dt=-sim.dt)
    assert np.max(np.abs(phi[0] - state.phi)) < 1e-12
    assert np.max(np.abs(p[0] - state.p)) < 1e-12


def test_evolve_equals_repeated_steps():
    params = array(64)
    sim = SimConfig(mode="full_cosine", dt=0.02, boundary="sponge", sponge_width=10)
    prof = FluxProfile(0.2, 0.9, front_position=20.0)
    state = init_wavepacket(WavePacketSpec(0.5, 4.0, 0.02, 32.0), params, sim)
    many = state
    for _ in range(50):
        many = step_lattice(many, params, prof, sim)
    once = evolve(state, params, prof, sim, 50)
    assert np.array_equal(many.phi, once.phi) and np.array_equal(many.p, once.p)


def test_work_energy_balance_with_moving_front():
    params = array(600)
    sim = SimConfig(mode="full_cosine", dt=0.02, boundary="fixed")
    prof = FluxProfile(0.2, 0.5, ramp_width=5.0, front_position=150.0)
    state = init_wavepacket(WavePacketSpec(0.5, 15.0, 0.05, 250.0, "left"), params, sim)
    model = LatticeModel(params, prof, sim)
    energy, power, times = [], [], []
    for _ in range(4000):
        energy.append(total_energy(state, params, prof, config=sim))
        power.append(injected_power(state, params, prof, sim))
        times.append(state.t * params.time_unit)
        state = model.run(state, 1)
    work = cumulative_trapezoid(power, times)[-1]
    change = energy[-1] - energy[0]
    assert abs(work) > 1e-3 * energy[0]
    assert change == pytest.approx(work, rel=1e-2)


@pytest.mark.parametrize("boundary", ["fixed", "periodic", "sponge"])
def test_mass_solve_inverts_mass(boundary):
    params = array(40, cj=3e-16)
    model = LatticeModel(params, None, SimConfig(boundary=boundary, sponge_width=5))
    dense = model.apply_mass(np.eye(40))
    rhs = np.random.default_rng(0).normal(size=(3, 40))
    assert np.allclose(model.solve_mass(rhs), np.linalg.solve(dense, rhs.T).T, atol=1e-13)
    assert np.allclose(dense, dense.T)


def test_packet_moves_at_group_velocity():
    params = array(2048)
    sim = SimConfig(mode="harmonic", dt=0.02, boundary="fixed")
    spec = WavePacketSpec(0.4, 40.0, 1e-3, 600.0)
    state = init_wavepacket(spec, params, sim)
    final = evolve(state, params, None, sim, 20_000)
    x = np.arange(2048)
    centre = lambda s: np.sum(x * s.phi**2) / np.sum(s.phi**2)  # noqa: E731
    vg = lattice_group_velocity(0.4, 0.0, params.capacitance_ratio)
    assert centre(final) - centre(state) == pytest.approx(vg * final.t, rel=1e-2)


def test_horizon_track_moves_with_front():
    params = array(1000)
    prof = FluxProfile(0.2, 0.95, ramp_width=5.0, front_position=200.0)
    sim = SimConfig(mode="full_cosine", dt=0.02, boundary="sponge")
    traj = evolve_with_front(LatticeState.zeros(1000), params, prof, sim, 200.0, stride=500)
    slope = np.polyfit(traj.horizon_times, traj.horizon_positions, 1)[0]
    assert slope == pytest.approx(0.95, rel=1e-9)


def test_divergence_reported():
    params = array(32)
    sim = SimConfig(mode="full_cosine", dt=0.02, boundary="fixed")
    with pytest.raises(ValueError):
        LatticeState(np.full(32, np.nan), np.zeros(32))
    phi, p = np.zeros((1, 32)), np.zeros((1, 32))
    phi[0, 5] = np.inf
    with pytest.raises(DivergenceError):
        LatticeModel(params, None, sim).advance(phi, p, 0.0, 10)


def test_configuration_checks():
    with pytest.raises(ConfigurationError):
        SimConfig(mode="linear")
    with pytest.raises(ConfigurationError):
        SimConfig(dt=0.5)
    with pytest.raises(ConfigurationError):
        init_wavepacket(WavePacketSpec(0.5, 10.0, 0.01, 50.0), array(1000), SimConfig(boundary="sponge"))
    with pytest.raises(ConfigurationError):
        standing_mode(0, 1e-3, array(16))
