import math

import numpy as np
import pytest
import scipy.constants as sc
from hypothesis import given, settings, strategies as st

from chipgravity import CONSTANTS, SingularBiasError
from chipgravity.circuit import (FluxProfile, SpeedProfile, SquidArrayParams, dispersion_omega,
                                 effective_metric_at, find_horizon, hawking_estimate, horizon_temperature,
                                 lattice_group_velocity, lattice_omega, phase_speed, surface_gravity,
                                 zero_flux_speed)
from chipgravity.errors import ParameterError

import oracles

ARRAY = SquidArrayParams(5e-6, 1e-15, 1e-16, 1e-6, 4096)


def test_constants_are_exact_si():
    assert CONSTANTS.planck == sc.h
    assert CONSTANTS.flux_quantum == pytest.approx(2.067833848e-15, rel=1e-9)
    assert CONSTANTS.von_klitzing == pytest.approx(25812.80745, rel=1e-9)
    assert CONSTANTS.table()["version"] == "CODATA 2018"


def test_zero_flux_speed_matches_oracle():
    assert zero_flux_speed(ARRAY) == pytest.approx(
        oracles.continuum_speed(0.0, 5e-6, 1e-15, 1e-6), rel=1e-14)


@pytest.mark.parametrize("flux", [0.0, 0.1, 0.2, 0.35])
def test_phase_speed_matches_oracle(flux):
    c, ratio = phase_speed(flux, ARRAY)
    assert c == pytest.approx(oracles.continuum_speed(flux, 5e-6, 1e-15, 1e-6), rel=1e-13)
    assert ratio == pytest.approx(math.sqrt(math.cos(math.pi * flux)), rel=1e-15)


def test_phase_speed_step_value():
    assert round(phase_speed(0.2, ARRAY)[1], 4) == 0.8995


@pytest.mark.parametrize("flux", [0.5, -0.5, 0.7, float("nan")])
def test_singular_bias_rejected(flux):
    with pytest.raises(SingularBiasError):
        phase_speed(flux, ARRAY)


def test_nonpositive_parameters_rejected():
    with pytest.raises(ParameterError):
        SquidArrayParams(-5e-6, 1e-15, 1e-16, 1e-6, 100)
    with pytest.raises(ParameterError):
        SquidArrayParams(5e-6, 1e-15, 1e-16, 1e-6, 2)


def test_hawking_estimate_against_oracle():
    t = hawking_estimate(ARRAY)
    assert t == pytest.approx(oracles.hawking_order_of_magnitude(5e-6, 1e-15), rel=1e-12)
    assert 0.060 <= t <= 0.075


def test_lattice_band_against_dense_chain():
    n, r = 64, 0.1
    k = 2 * np.pi * np.arange(n) / n
    mine = np.sort(lattice_omega(k, 0.15, r))
    exact = oracles.chain_frequencies(n, math.cos(math.pi * 0.15), r)
    assert np.max(np.abs(mine - exact)) < 1e-12


def test_continuum_limit_of_band():
    k = np.array([1e-3, 1e-2]) / ARRAY.cell_length
    w = dispersion_omega(k, ARRAY)
    assert np.allclose(w / (k * zero_flux_speed(ARRAY)), 1.0, rtol=1e-4)


def test_group_velocity_is_band_derivative():
    k = np.linspace(0.05, 3.0, 40)
    h = 1e-6
    fd = (lattice_omega(k + h, 0.1, 0.1) - lattice_omega(k - h, 0.1, 0.1)) / (2 * h)
    assert np.allclose(lattice_group_velocity(k, 0.1, 0.1), fd, rtol=1e-7)


def test_profile_limits_and_gradient():
    prof = FluxProfile(0.2, 0.95, ramp_width=5.0, front_position=100.0)
    assert prof.flux(-1e4) == pytest.approx(0.2)
    assert prof.flux(1e4) == pytest.approx(0.0)
    x = np.linspace(80, 120, 21)
    g = SpeedProfile(prof, ARRAY)
    assert np.allclose(g.gradient(x), g.gradient(x, analytic=False), rtol=1e-4, atol=1e-6)


def test_horizon_sits_where_speed_equals_front_speed():
    prof = FluxProfile(0.2, 0.95, ramp_width=5.0, front_position=100.0)
    x_h = find_horizon(prof, ARRAY)
    assert prof.speed(x_h) == pytest.approx(0.95, abs=1e-14)
    assert abs(effective_metric_at(x_h, prof).g_xx) < 1e-12
    assert find_horizon(FluxProfile(0.2, 0.5), ARRAY) is None


def test_horizon_temperature_uses_surface_gravity():
    prof = FluxProfile(0.2, 0.95, ramp_width=5.0)
    kappa = surface_gravity(prof)
    expected = sc.hbar * kappa / ARRAY.time_unit / (2 * math.pi * sc.k)
    assert horizon_temperature(prof, ARRAY) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(amp=st.floats(0.02, 0.45), x=st.floats(-30, 30), w=st.floats(1.0, 20.0), frac=st.floats(0.05, 0.95))
def test_metric_determinant_and_horizon(amp, x, w, frac):
    behind = math.sqrt(math.cos(math.pi * amp))
    u = behind + frac * (1 - behind)
    prof = FluxProfile(amp, u, ramp_width=w)
    assert effective_metric_at(x, prof).determinant == pytest.approx(-1.0, rel=1e-12)
    x_h = find_horizon(prof)
    assert x_h is not None
    assert abs(prof.speed(x_h) - u) < 1e-12


@settings(max_examples=40, deadline=None)
@given(flux=st.floats(-0.49, 0.49))
def test_phase_speed_never_exceeds_zero_bias(flux):
    assert phase_speed(flux, ARRAY)[1] <= 1.0
