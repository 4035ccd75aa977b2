import math
import warnings

import numpy as np
import pytest
import scipy.constants as sc

from chipgravity import CutoffError, IntegrationAccuracyError, ParameterError, PhysicsRegimeWarning
from chipgravity.unruh import (DensityMatrix, RabiParams, UnruhCircuitParams, asymptotic_gap,
                               basis_state, charging_capacitance, coupling_g, coupling_gm, drive_resonances,
                               evolve_rk4, lindblad_evolve, liouvillian_parts, log_negativity, operators,
                               partial_transpose_qubit, rabi_hamiltonian, reference_circuit, reference_params,
                               steady_state_observables, transmon_levels)
from chipgravity.unruh.lindblad import geometric_power, unvec
from chipgravity.unruh.model import hamiltonian_parts

import oracles

H = sc.h
EC = H * 1e9


# --- transmon -----------------------------------------------------------------

@pytest.mark.parametrize("ratio", [1.0, 5.0, 15.0, 50.0])
def test_transmon_gap_matches_mathieu(ratio):
    spec = transmon_levels(EC, ratio * EC)
    assert spec.qubit_gap == pytest.approx(oracles.transmon_gap_mathieu(EC, ratio * EC), rel=1e-10)


def test_transmon_reference_gap_and_convergence():
    spec = transmon_levels(EC, 15 * EC)
    assert 4.5e9 <= spec.qubit_gap / H <= 5.5e9
    assert spec.cutoff_shift < 1e-10
    assert transmon_levels(EC, 15 * EC, n_max=60).qubit_gap == pytest.approx(spec.qubit_gap, rel=1e-12)


def test_charge_limit_without_josephson_energy():
    spec = transmon_levels(EC, 0.0)
    assert spec.qubit_gap == pytest.approx(EC, rel=1e-14)


def test_asymptotic_gap_within_ten_percent():
    for ratio in (15.0, 50.0):
        exact = transmon_levels(EC, ratio * EC).qubit_gap
        assert asymptotic_gap(EC, ratio * EC) == pytest.approx(exact, rel=0.1)


def test_transmon_cutoff_checks():
    with pytest.raises(ParameterError):
        transmon_levels(EC, 15 * EC, n_max=5)
    with pytest.raises(CutoffError):
        transmon_levels(EC, 1e5 * EC, n_max=10)


def test_charge_matrix_element_near_harmonic_value():
    spec = transmon_levels(EC, 50 * EC)
    # harmonic limit |<1|n|0>| = (E_J / (2 E_C))^(1/4) / sqrt(2) for H = E_C n^2 - E_J cos(phi)
    assert abs(spec.charge_matrix_element) == pytest.approx((50 / 2) ** 0.25 / math.sqrt(2), rel=0.05)


# --- circuit couplings ------------------------------------------------------------

def test_reference_circuit_constants():
    c = reference_circuit()
    assert c.charging_energy == pytest.approx(EC, rel=1e-12)
    assert charging_capacitance(EC, c.fbar_capacitance) == pytest.approx(c.junction_capacitance)
    spec = c.transmon()
    g = coupling_g(c, spec)
    scale = math.sqrt(sc.h / sc.e**2 / (4 * math.pi * 50.0))
    assert abs(g) == pytest.approx(scale * EC * 0.01 * abs(spec.charge_matrix_element) / sc.hbar, rel=1e-12)
    gm = coupling_gm(c, g)
    lever = 2 * c.junction_capacitance / c.total_capacitance
    assert abs(gm) == pytest.approx(lever * 1e-11 / 5e-7 * abs(g), rel=1e-12)


def test_circuit_regime_warnings():
    c = reference_circuit()
    fields = {k: getattr(c, k) for k in c.__dataclass_fields__}
    with pytest.warns(PhysicsRegimeWarning):
        UnruhCircuitParams(**dict(fields, fbar_capacitance=1e-13))
    with pytest.warns(PhysicsRegimeWarning):
        UnruhCircuitParams(**dict(fields, drive_amplitude=1e-8))


# --- model -------------------------------------------------------------------

def test_hamiltonian_hermitian_and_periodic():
    p = reference_params(n_fock=6)
    h = rabi_hamiltonian(0.3, p)
    assert np.allclose(h, h.conj().T)
    assert np.allclose(rabi_hamiltonian(0.3 + p.period, p), h)


def test_hamiltonian_ground_energy_perturbative():
    p = reference_params(n_fock=10)
    h0, _ = hamiltonian_parts(p)
    e0 = np.linalg.eigvalsh(h0)[0]
    # second order: only |e,1> couples to the bare ground state, with strength |g|
    bare = -0.5 * p.qubit_gap
    shift = -abs(p.coupling) ** 2 / (1 + p.qubit_gap)
    assert e0 == pytest.approx(bare + shift, abs=5 * abs(p.coupling) ** 4)


def test_operator_algebra():
    ops = operators(5)
    assert np.allclose(ops.sigma_plus @ ops.sigma_minus, ops.excited)
    assert np.allclose(np.diag(ops.number).real, np.tile(np.arange(5), 2))


def test_params_validation():
    with pytest.raises(ParameterError):
        reference_params(n_fock=2)
    with pytest.warns(PhysicsRegimeWarning):
        RabiParams(1.0, 0.1, 0.0, 2.0, 1e-3, 1e-3)
    p = RabiParams.from_si(2e10, 1.1 * sc.hbar * 2e10, 2e9, 2e4, 4.4e10, 1e5, 1e5)
    assert p.qubit_gap == pytest.approx(1.1) and p.cavity_decay == pytest.approx(5e-6)


def test_density_matrix_validation():
    with pytest.raises(ParameterError):
        DensityMatrix(np.eye(8))
    rho = basis_state(4, photons=2, excited=True).entries
    assert rho[6, 6] == 1.0


# --- master equation --------------------------------------------------------------------

def test_uncoupled_ground_state_is_dark():
    p = RabiParams(1.1, 0.0, 0.0, 2.2, 5e-3, 5e-3, n_fock=5)
    tr = lindblad_evolve(p, 50 * p.period, stride=64)
    assert np.max(np.abs(tr.mean_photon)) < 1e-14
    assert np.max(np.abs(tr.log_negativity)) < 1e-12


def test_single_photon_decays_exponentially():
    gamma = 0.008
    p = RabiParams(1.1, 0.0, 0.0, 2.2, gamma, 0.005, n_fock=5)
    tr = lindblad_evolve(p, 40 * p.period, stride=32, rho0=basis_state(5, photons=1))
    expected = np.array([oracles.decay_photon_number(gamma, t) for t in tr.times])
    assert np.max(np.abs(tr.mean_photon - expected)) < 1e-6


def test_propagator_matches_lab_frame_rk4():
    p = RabiParams(1.1, 0.1, 1e-2, 2.2, 1e-3, 2e-3, n_fock=5)
    periods = 10
    fast = lindblad_evolve(p, periods * p.period, stride=64)
    slow = evolve_rk4(p, periods * p.period, dt=p.period / 640, stride=640)
    assert np.allclose(fast.times, slow.times)
    assert np.max(np.abs(fast.mean_photon - slow.mean_photon)) < 1e-8
    assert np.max(np.abs(fast.log_negativity - slow.log_negativity)) < 1e-6
    assert fast.trace_drift < 1e-8 and fast.hermiticity < 1e-10


def test_geometric_power():
    m = np.random.default_rng(3).normal(size=(5, 5)) * 0.3
    for n in (0, 1, 6, 13):
        pw, sm = geometric_power(m, n)
        assert np.allclose(pw, np.linalg.matrix_power(m, n))
        assert np.allclose(sm, sum(np.linalg.matrix_power(m, j) for j in range(n)) if n else 0)


def test_steady_state_matches_floquet_oracle():
    p = RabiParams(1.1, 0.1, 1e-2, 2.15, 8e-3, 8e-3, n_fock=5)
    s = steady_state_observables(p, tol=1e-6)
    l0, l1 = liouvillian_parts(p, sparse=True)
    harmonics = oracles.floquet_steady_state(l0, l1, p.drive_frequency)
    rho0 = unvec(harmonics[len(harmonics) // 2])
    oracle_photon = np.trace(operators(5).number @ rho0).real
    assert s.mean_photon == pytest.approx(oracle_photon, rel=1e-4)
    assert s.hygiene["trace_drift"] < 1e-8


def test_coupling_phase_is_a_gauge():
    base = RabiParams(1.1, 0.1, 1e-2, 2.15, 8e-3, 8e-3, n_fock=5)
    ref = steady_state_observables(base)
    for theta in (0.7, 2.1):
        z = complex(math.cos(theta), math.sin(theta))
        s = steady_state_observables(base.with_(coupling=0.1 * z, modulation=1e-2 * z))
        assert s.mean_photon == pytest.approx(ref.mean_photon, rel=1e-9)
        assert s.e_n_max == pytest.approx(ref.e_n_max, rel=1e-7)


def test_drive_resonance_near_dressed_sum_frequency():
    p = reference_params()
    lines = drive_resonances(p, 2.15, 2.25)
    assert np.min(np.abs(lines - 2.202791)) < 1e-5
    weak = drive_resonances(p.with_(coupling=1e-4 + 0j), 2.05, 2.15)
    assert np.min(np.abs(weak - 2.1)) < 1e-6


def test_steady_hygiene_failure_raises():
    p = RabiParams(1.1, 0.1, 1e-2, 2.15, 8e-3, 8e-3, n_fock=5)
    with pytest.raises(IntegrationAccuracyError):
        steady_state_observables(p, tol=0.0, max_windows=2)


# --- entanglement -----------------------------------------------------------------------

def _pure(vec):
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def test_log_negativity_of_product_and_bell_states():
    n = 4
    prod = np.zeros(2 * n)
    prod[0] = 1
    assert log_negativity(_pure(prod)) == pytest.approx(0.0, abs=1e-12)
    bell = np.zeros(2 * n)
    bell[0] = bell[n + 1] = 1 / math.sqrt(2)
    assert log_negativity(_pure(bell)) == pytest.approx(1.0, abs=1e-12)
    mixed = 0.5 * _pure(bell) + 0.5 * np.eye(2 * n) / (2 * n)
    assert 0 < log_negativity(mixed) < 1


def test_partial_transpose_preserves_trace():
    rho = _pure(np.random.default_rng(4).normal(size=8))
    rho /= np.trace(rho)
    pt = partial_transpose_qubit(rho)
    assert np.trace(pt) == pytest.approx(1.0)
    assert np.allclose(partial_transpose_qubit(pt), rho)


def test_log_negativity_rejects_non_hermitian():
    rho = np.eye(8, dtype=complex) / 8
    rho[0, 1] = 0.1
    with pytest.raises(ParameterError):
        log_negativity(rho)


def test_off_resonance_drive_leaves_dressed_vacuum():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        p = reference_params(n_fock=6, drive_frequency=2.3)
    driven = steady_state_observables(p, tol=1e-8)
    still = steady_state_observables(p.with_(modulation=0j), tol=1e-8)
    # counter-rotating terms dress the vacuum with virtual photons
    assert still.mean_photon > 1e-3
    assert driven.mean_photon == pytest.approx(still.mean_photon, rel=1e-5)
    assert driven.photon_max - driven.photon_min < 1e-3 * driven.mean_photon
