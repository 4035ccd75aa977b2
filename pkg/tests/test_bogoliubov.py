import numpy as np
import pytest
import scipy.constants as sc

from chipgravity import ConfigurationError
from chipgravity.bogoliubov import (ModeSet, bogoliubov_matrices, comoving_frequency_limit, plan_spectrum,
                                    symplectic_product, thermal_fit)
from chipgravity.circuit import FluxProfile, SquidArrayParams
from chipgravity.lattice import LatticeModel, SimConfig

SMALL = SquidArrayParams(5e-6, 1e-15, 1e-16, 1e-6, 32)
HARMONIC = SimConfig(mode="harmonic", dt=0.08, boundary="fixed")


@pytest.mark.parametrize("coupling", [0.0, 0.2])
def test_uniform_modes_orthonormal(coupling):
    assert ModeSet.uniform(50, junction_coupling=coupling, dt=0.05).orthonormality_error() < 1e-12


def test_dense_modes_orthonormal_and_match_uniform():
    model = LatticeModel(SMALL, None, HARMONIC)
    dense = ModeSet.from_model(model, 0.0, HARMONIC.dt)
    assert dense.orthonormality_error() < 1e-11
    uniform = ModeSet.uniform(32, junction_coupling=0.2)
    assert np.allclose(np.sort(dense.frequencies), uniform.frequencies, atol=1e-12)


def test_projection_inverts_synthesis():
    modes = ModeSet.uniform(40, junction_coupling=0.2, dt=0.05)
    c = np.random.default_rng(1).normal(size=40) + 1j * np.random.default_rng(2).normal(size=40)
    phi, p = modes.synthesize(c)
    alpha, beta = modes.project(phi, p)
    assert np.allclose(alpha, c, atol=1e-12)
    assert np.allclose(beta, 0, atol=1e-12)
    u = modes.mode_function(3)
    assert symplectic_product(*u, *u).real == pytest.approx(1.0, abs=1e-12)


def test_static_profile_creates_no_pairs():
    res = bogoliubov_matrices(SMALL, FluxProfile(0.0, 0.0, floor=0.1), HARMONIC, 400.0)
    assert np.max(np.abs(res.beta)) < 1e-8
    assert np.max(np.abs(res.norm_violation)) < 1e-6


def test_adiabatic_front_creates_almost_no_pairs():
    prof = FluxProfile(0.1, 0.05, ramp_width=10.0, front_position=-30.0)
    res = bogoliubov_matrices(SMALL, prof, HARMONIC, 90 / 0.05)
    assert np.sum(np.abs(res.beta) ** 2) < 1e-4
    assert np.max(np.abs(res.norm_violation)) < 1e-6


def test_sudden_front_creates_pairs_and_keeps_norm():
    prof = FluxProfile(0.3, 20.0, ramp_width=1.0, front_position=-20.0)
    res = bogoliubov_matrices(SMALL, prof, HARMONIC, 5.0)
    assert np.sum(np.abs(res.beta) ** 2) > 1e-3
    assert np.max(np.abs(res.norm_violation)) < 1e-6


def test_thermal_fit_recovers_temperature():
    temp = 0.067
    omega = np.linspace(1e9, 2e10, 30)
    n = 1 / np.expm1(sc.hbar * omega / (sc.k * temp))
    fitted, intercept, resid = thermal_fit(omega, n)
    assert fitted == pytest.approx(temp, rel=1e-10)
    assert abs(intercept) < 1e-9 and resid < 1e-12
    assert np.isnan(thermal_fit(omega[:1], n[:1])[0])


def test_spectrum_plan_geometry():
    prof = FluxProfile(0.2, 0.95, ramp_width=5.0)
    limit, _ = comoving_frequency_limit(prof)
    plan = plan_spectrum(prof, np.geomspace(0.2, 1.2, 8))
    assert limit > 1.2 * plan.surface_gravity
    assert len(plan.packets) == 8 and plan.required_cells > 0
    assert all(pk.group_velocity > prof.front_speed for pk in plan.packets)


def test_spectrum_plan_rejects_frequencies_beyond_branch():
    prof = FluxProfile(0.2, 0.95, ramp_width=5.0)
    with pytest.raises(ConfigurationError):
        plan_spectrum(prof, [0.5, 1.2], junction_coupling=0.2)


def test_matrices_need_harmonic_fixed_lattice():
    with pytest.raises(ConfigurationError):
        bogoliubov_matrices(SMALL, None, SimConfig(mode="full_cosine", boundary="fixed"), 1.0)
    with pytest.raises(ConfigurationError):
        bogoliubov_matrices(SMALL, None, SimConfig(mode="harmonic", boundary="periodic"), 1.0)
