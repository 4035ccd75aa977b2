"""Pair production at a moving flux front from harmonic mode evolution.

Two routes are provided.

``bogoliubov_matrices`` evolves every positive-frequency normal mode of a
small fixed-end lattice through the full run and projects onto the normal
modes of the final Hamiltonian, giving complete alpha/beta matrices.

``bogoliubov_spectrum`` targets the stationary emission of a long lattice.
Each requested comoving frequency defines a right-moving out-wavepacket in
the uniform region ahead of the front at late time; the packet is traced
backwards through the front (leapfrog run with negative step, which is the
exact inverse map) and decomposed on the uniform in-region modes.  The
summed squared negative-frequency weights give the mean number of quanta
the in-vacuum holds in that packet.

Normal modes use the frequency ``Omega = omega*sqrt(1 - (h*omega/2)**2)``,
which makes them exact eigenvectors of the leapfrog map of step h; a
static lattice therefore mixes no frequencies, to roundoff.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.fft import dst
from scipy.linalg import eigh
from scipy.optimize import brentq

from chipgravity.circuit import (
    FluxProfile,
    SquidArrayParams,
    find_horizon,
    hawking_temperature,
    lattice_group_velocity,
    lattice_omega,
)
from chipgravity.constants import HBAR, KB
from chipgravity.errors import ConfigurationError, IntegratorResolutionError
from chipgravity.lattice import LatticeModel, SimConfig

NORM_TOL = 1e-4


def _step_frequency(omega, dt):
    if dt is None:
        return omega
    x = 0.5 * abs(dt) * omega
    if np.any(x >= 1):
        raise ConfigurationError("time step too large for the highest mode frequency", "dt")
    return omega * np.sqrt(1.0 - x * x)


def _dst(a):
    """Orthonormal DST-I along the last axis."""
    n = a.shape[-1]
    return dst(a, type=1, axis=-1) * math.sqrt(0.5 / (n + 1))


@dataclass
class ModeSet:
    """Normal modes of a harmonic lattice with fixed ends (lattice units).

    Either ``vectors`` (columns M-orthonormal, ``v^T M v = I``) and ``mass``
    are given, or the modes are the sine modes of a uniform chain cached
    through ``mass_eigenvalues``.
    """

    frequencies: np.ndarray
    step_frequencies: np.ndarray
    vectors: Optional[np.ndarray] = None
    mass: Optional[np.ndarray] = None
    mass_eigenvalues: Optional[np.ndarray] = None

    @classmethod
    def uniform(cls, n, stiffness=1.0, junction_coupling=0.0, dt=None):
        """Sine modes of a uniform chain; junction_coupling is 2*C_J/C0."""
        theta = np.pi * np.arange(1, n + 1) / (n + 1)
        lam = 4.0 * np.sin(0.5 * theta) ** 2
        mu = 1.0 + junction_coupling * lam
        omega = np.sqrt(stiffness * lam / mu)
        return cls(omega, _step_frequency(omega, dt), mass_eigenvalues=mu)

    @classmethod
    def from_model(cls, model: LatticeModel, t: float, dt=None):
        """Dense generalized eigenmodes of the lattice Hamiltonian at time t."""
        if model.config.boundary != "fixed":
            raise ConfigurationError("complete mode sets need fixed boundaries", "boundary")
        eye = np.eye(model.n)
        stiff = -model.potential_force(eye, t)
        stiff = 0.5 * (stiff + stiff.T)
        mass = model.apply_mass(eye)
        w2, vec = eigh(stiff, mass)
        omega = np.sqrt(np.clip(w2, 0.0, None))
        return cls(omega, _step_frequency(omega, dt), vectors=vec, mass=mass)

    @property
    def size(self):
        return self.frequencies.size

    @property
    def is_uniform(self):
        return self.vectors is None

    def _coordinates(self, phi, p):
        """(v^T M phi, v^T p) along the last axis."""
        if self.is_uniform:
            s_phi, s_p = _dst(phi), _dst(p)
            root = np.sqrt(self.mass_eigenvalues)
            return root * s_phi, s_p / root
        return (phi @ self.mass) @ self.vectors, p @ self.vectors

    def project(self, phi, p):
        """Positive and negative frequency amplitudes (alpha, beta) of complex field data."""
        q, r = self._coordinates(np.asarray(phi), np.asarray(p))
        om = self.step_frequencies
        norm = np.sqrt(2.0 * om)
        return (om * q + 1j * r) / norm, (om * q - 1j * r) / norm

    def synthesize(self, coeffs):
        """Field data (phi, p) of sum_j c_j u_j for positive-frequency mode functions u_j."""
        coeffs = np.asarray(coeffs, dtype=complex)
        om = self.step_frequencies
        a = coeffs / np.sqrt(2.0 * om)
        if self.is_uniform:
            root = np.sqrt(self.mass_eigenvalues)
            return _dst(a / root), _dst(-1j * om * root * a)
        return a @ self.vectors.T, (-1j * om * a) @ (self.mass @ self.vectors).T

    def mode_function(self, j):
        c = np.zeros(self.size, dtype=complex)
        c[j] = 1.0
        return self.synthesize(c)

    def in_mode_functions(self):
        """All positive-frequency initial data as rows (phi, p)."""
        return self.synthesize(np.eye(self.size))

    def orthonormality_error(self):
        """max |<u_j, u_k> - delta_jk| under the symplectic inner product."""
        phi, p = self.in_mode_functions()
        gram = 1j * (phi.conj() @ p.T - p.conj() @ phi.T)
        return float(np.max(np.abs(gram - np.eye(self.size))))


def symplectic_product(phi1, p1, phi2, p2):
    """<z1, z2> = i (phi1^* . p2 - p1^* . phi2)."""
    return 1j * (np.vdot(phi1, p2) - np.vdot(p1, phi2))


@dataclass
class BogoliubovResult:
    """Mode-mixing coefficients and thermal-fit diagnostics.

    ``alpha[j, k]`` and ``beta[j, k]`` couple in-mode j to out-mode k.
    Frequencies are in rad/s; ``omega`` is the comoving-frame frequency.
    """

    alpha: np.ndarray
    beta: np.ndarray
    omega: np.ndarray
    omega_lab: np.ndarray
    wavenumber: np.ndarray
    beta_sq: np.ndarray
    norm_violation: np.ndarray
    fitted_temperature: float = float("nan")
    fit_intercept: float = float("nan")
    fit_residual: float = float("nan")
    hawking_temperature: float = float("nan")
    fit_mask: Optional[np.ndarray] = None
    horizon_residual: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def norm_violation_max(self):
        return float(np.max(np.abs(self.norm_violation))) if self.norm_violation.size else 0.0

    def to_json(self):
        return {
            "omega": self.omega.tolist(),
            "omega_lab": self.omega_lab.tolist(),
            "wavenumber_per_cell": self.wavenumber.tolist(),
            "beta_sq": self.beta_sq.tolist(),
            "fitted_temperature_K": self.fitted_temperature,
            "fit_intercept": self.fit_intercept,
            "fit_residual": self.fit_residual,
            "hawking_temperature_K": self.hawking_temperature,
            "norm_violation_max": self.norm_violation_max,
            "horizon_residual": self.horizon_residual,
            **self.diagnostics,
        }


def _require_harmonic(config: SimConfig):
    if config.mode != "harmonic":
        raise ConfigurationError("Bogoliubov analysis requires harmonic mode", "mode")


def _split_rows(z):
    return np.ascontiguousarray(np.vstack([z.real, z.imag]))


def _join_rows(a):
    half = a.shape[0] // 2
    return a[:half] + 1j * a[half:]


def bogoliubov_matrices(params: SquidArrayParams, profile: Optional[FluxProfile], config: SimConfig,
                        t_final: float, t_initial: float = 0.0) -> BogoliubovResult:
    """Complete alpha/beta matrices for a small fixed-end lattice.

    In-modes diagonalize the Hamiltonian at ``t_initial`` and out-modes the
    one at ``t_final``.  Rows of the returned matrices are in-modes.
    """
    _require_harmonic(config)
    if config.boundary != "fixed":
        raise ConfigurationError("complete Bogoliubov matrices need fixed boundaries", "boundary")
    model = LatticeModel(params, profile, config)
    nsteps = int(round((t_final - t_initial) / config.dt))
    t_end = t_initial + nsteps * config.dt
    modes_in = ModeSet.from_model(model, t_initial, config.dt)
    modes_out = ModeSet.from_model(model, t_end, config.dt)
    phi, p = modes_in.in_mode_functions()
    phi_r, p_r = _split_rows(phi), _split_rows(p)
    model.advance(phi_r, p_r, t_initial, nsteps)
    alpha, beta = modes_out.project(_join_rows(phi_r), _join_rows(p_r))
    norm = np.sum(np.abs(alpha) ** 2 - np.abs(beta) ** 2, axis=1) - 1.0
    if np.max(np.abs(norm)) > NORM_TOL:
        raise IntegratorResolutionError(
            f"symplectic norm violated by {np.max(np.abs(norm)):.2e}; reduce dt"
        )
    beta_sq = np.sum(np.abs(beta) ** 2, axis=0)
    omega_out = modes_out.frequencies / params.time_unit
    return BogoliubovResult(
        alpha=alpha, beta=beta, omega=omega_out, omega_lab=omega_out,
        wavenumber=np.full(omega_out.size, np.nan), beta_sq=beta_sq, norm_violation=norm,
    )


# ----------------------------------------------------------------------------
# stationary spectrum from backward-traced out-packets


@dataclass(frozen=True)
class PacketPlan:
    comoving_frequency: float  # lattice units
    wavenumber: float
    group_velocity: float
    width: float
    distance: float
    duration: float


@dataclass(frozen=True)
class SpectrumPlan:
    """Geometry of a spectrum run (lattice units, time measured from the stop time)."""

    packets: tuple
    stop_front: float
    surface_gravity: float
    horizon_offset: float
    conversion_time: float
    front_speed: float
    required_cells: int

    def horizon_position(self, t):
        return self.stop_front + self.horizon_offset + self.front_speed * t


DEFAULT_GRID = np.geomspace(0.2, 1.2, 64)


def comoving_frequency_limit(profile: FluxProfile, junction_coupling=0.0):
    """Largest comoving frequency omega(k) - u k on the co-propagating branch ahead of the front."""
    r = 0.5 * junction_coupling
    u = profile.front_speed
    ks = brentq(lambda k: lattice_group_velocity(k, profile.floor, r) - u, 1e-12, math.pi - 1e-12)
    return float(lattice_omega(ks, profile.floor, r) - u * ks), float(ks)


def plan_spectrum(profile: FluxProfile, mode_grid, junction_coupling=0.0, conversion=6.0,
                  min_width=30.0, stop_margin=None, edge_margin=200.0) -> SpectrumPlan:
    """Packet wavenumbers, widths and run durations for frequencies ``mode_grid`` (units of kappa)."""
    x_h0 = find_horizon(profile, None, 0.0)
    if x_h0 is None:
        raise ConfigurationError("profile has no horizon; nothing to radiate", "front_speed")
    kappa = float(abs(profile.speed_dx(x_h0, 0.0)))
    offset = x_h0 - profile.front_center(0.0)
    r = 0.5 * junction_coupling
    u = profile.front_speed
    w_max, k_star = comoving_frequency_limit(profile, junction_coupling)
    w = profile.ramp_width
    stop_front = 30 * w + 100 if stop_margin is None else stop_margin
    packets = []
    for x in np.asarray(mode_grid, dtype=float):
        target = x * kappa
        if not 0 < target < w_max:
            raise ConfigurationError(
                f"comoving frequency {x} kappa outside (0, {w_max / kappa:.3f} kappa)", "mode_grid"
            )
        k = brentq(lambda q: lattice_omega(q, profile.floor, r) - u * q - target, 1e-14, k_star)
        vg = float(lattice_group_velocity(k, profile.floor, r))
        # k*width >= 5 keeps the packet's spectral weight near q = 0 below 1e-11,
        # which bounds the non-local tails of its positive-frequency part
        width = max(min_width, 5.0 / k)
        dist = 4 * width + 8 * w
        # the trailing tail (3 widths behind the centre) must also reach the horizon
        duration = (dist + 3 * width) / (vg - u) + conversion / kappa
        packets.append(PacketPlan(target, float(k), vg, width, dist, duration))
    reach = max(stop_front + offset + u * pk.duration + pk.distance + 10 * pk.width for pk in packets)
    return SpectrumPlan(tuple(packets), stop_front, kappa, offset, conversion / kappa, u,
                        int(math.ceil(reach + edge_margin)))


def _out_packets(plan: SpectrumPlan, packets, n, modes: ModeSet, dt):
    """Normalized positive-frequency out-packets (rows) and their backward step counts."""
    x = np.arange(n, dtype=float)
    phis, ps, steps = [], [], []
    for pk in packets:
        nstep = int(round(pk.duration / dt))
        centre = plan.horizon_position(nstep * dt) + pk.distance
        shape = np.exp(-((x - centre) ** 2) / (4 * pk.width**2) + 1j * pk.wavenumber * (x - centre))
        coeffs = _dst(shape)
        coeffs /= np.linalg.norm(coeffs)
        phi, p = modes.synthesize(coeffs)
        phis.append(phi)
        ps.append(p)
        steps.append(nstep)
    return np.array(phis), np.array(ps), np.array(steps, dtype=np.int64)


def _trace_packets(params, profile, config, plan, packets, track_every=50, pad=150, tol=1e-10):
    """Backward-trace a batch of out-packets to the stop time; returns (alpha, beta, residual)."""
    n = params.num_cells
    dt = abs(config.dt)
    r2 = 2 * params.capacitance_ratio if config.include_junction_capacitance else 0.0
    ahead = math.cos(math.pi * profile.floor)
    modes = ModeSet.uniform(n, ahead, r2, dt)
    # place the front so that it sits at plan.stop_front at t = 0
    run_profile = FluxProfile(profile.amplitude, profile.front_speed, profile.ramp_width, profile.floor,
                              plan.stop_front)
    model = LatticeModel(params, run_profile, config)
    phi, p, steps = _out_packets(plan, packets, n, modes, dt)
    order = np.argsort(-steps, kind="stable")
    total = int(steps.max())
    start = np.repeat(total - steps[order], 1)
    # real and imaginary rows of each packet are activated together
    phi_r = np.empty((2 * len(packets), n))
    p_r = np.empty_like(phi_r)
    phi_r[0::2], phi_r[1::2] = phi[order].real, phi[order].imag
    p_r[0::2], p_r[1::2] = p[order].real, p[order].imag
    start = np.repeat(start, 2)
    model.advance(phi_r, p_r, total * dt, total, dt=-dt, start_step=start,
                  track_every=track_every, pad=pad, tol=tol)
    phi_c = phi_r[0::2] + 1j * phi_r[1::2]
    p_c = p_r[0::2] + 1j * p_r[1::2]
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    phi_c, p_c = phi_c[inv], p_c[inv]
    alpha, beta = modes.project(phi_c, p_c)
    # share of field energy still sitting at or behind the front
    dens = np.abs(p_c) ** 2 + np.abs(np.diff(phi_c, axis=1, append=0.0)) ** 2
    cut = int(plan.stop_front - 4 * profile.ramp_width)
    residual = np.sum(dens[:, :cut], axis=1) / np.sum(dens, axis=1)
    return alpha.T, beta.T, residual


def thermal_fit(omega_si, beta_sq, mask=None):
    """Fit ln(1/n + 1) = hbar*omega/(k_B T) + c; returns (T, c, relative rms residual)."""
    omega_si = np.asarray(omega_si, dtype=float)
    n = np.asarray(beta_sq, dtype=float)
    mask = np.ones(n.size, dtype=bool) if mask is None else np.asarray(mask)
    mask = mask & (n > 0)
    if mask.sum() < 2:
        return float("nan"), float("nan"), float("nan")
    x = HBAR * omega_si[mask] / KB
    y = np.log1p(1.0 / n[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return 1.0 / slope, float(intercept), float(np.sqrt(np.mean(resid**2)) / np.mean(np.abs(y)))


def bogoliubov_spectrum(params: SquidArrayParams, profile: FluxProfile, config: SimConfig,
                        mode_grid=None, jobs: int = 1, min_wavelength: float = 10.0,
                        conversion: float = 6.0) -> BogoliubovResult:
    """Stationary pair-production spectrum of a moving front.

    ``mode_grid`` lists comoving frequencies in units of the surface gravity
    kappa = |dc/dx| at the horizon.  The front shape (amplitude, floor, speed
    and width) is taken from ``profile``; its position is chosen internally.
    The lattice must hold ``plan_spectrum(...).required_cells`` cells.
    """
    _require_harmonic(config)
    if config.boundary != "fixed":
        raise ConfigurationError("spectrum runs use fixed ends far from the packets", "boundary")
    grid = DEFAULT_GRID if mode_grid is None else np.asarray(mode_grid, dtype=float)
    r2 = 2 * params.capacitance_ratio if config.include_junction_capacitance else 0.0
    plan = plan_spectrum(profile, grid, r2, conversion=conversion)
    if params.num_cells < plan.required_cells:
        raise ConfigurationError(
            f"{params.num_cells} cells is too short; this grid needs {plan.required_cells}", "num_cells"
        )
    packets = list(plan.packets)
    jobs = max(1, int(jobs))
    if jobs == 1:
        parts = [_trace_packets(params, profile, config, plan, packets)]
    else:
        chunks = [packets[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_trace_packets, params, profile, config, plan, c) for c in chunks if c]
            results = [f.result() for f in futures]
        # undo the round-robin split so column k is grid point k
        order = np.concatenate([np.arange(len(packets))[i::jobs] for i in range(jobs)])
        alpha = np.empty((params.num_cells, len(packets)), dtype=complex)
        beta = np.empty_like(alpha)
        resid = np.empty(len(packets))
        alpha[:, order] = np.hstack([r[0] for r in results])
        beta[:, order] = np.hstack([r[1] for r in results])
        resid[order] = np.concatenate([r[2] for r in results])
        parts = [(alpha, beta, resid)]
    alpha, beta, resid = parts[0]
    norm = np.sum(np.abs(alpha) ** 2 - np.abs(beta) ** 2, axis=0) - 1.0
    if np.max(np.abs(norm)) > NORM_TOL:
        raise IntegratorResolutionError(f"symplectic norm violated by {np.max(np.abs(norm)):.2e}; reduce dt")
    beta_sq = np.sum(np.abs(beta) ** 2, axis=0)
    tu = params.time_unit
    w_co = np.array([pk.comoving_frequency for pk in packets]) / tu
    k = np.array([pk.wavenumber for pk in packets])
    w_lab = w_co + profile.front_speed * k / tu
    mask = 2 * np.pi / k >= min_wavelength
    t_fit, intercept, residual = thermal_fit(w_co, beta_sq, mask)
    t_h = hawking_temperature(plan.surface_gravity / tu)
    return BogoliubovResult(
        alpha=alpha, beta=beta, omega=w_co, omega_lab=w_lab, wavenumber=k, beta_sq=beta_sq,
        norm_violation=norm, fitted_temperature=t_fit, fit_intercept=intercept, fit_residual=residual,
        hawking_temperature=t_h, fit_mask=mask, horizon_residual=float(np.max(resid)),
        diagnostics={
            "surface_gravity_per_s": plan.surface_gravity / tu,
            "required_cells": plan.required_cells,
            "mode_grid_kappa": grid.tolist(),
            "thermal_ratio": (beta_sq / (1.0 / np.expm1(HBAR * w_co / (KB * t_h)))).tolist(),
        },
    )
