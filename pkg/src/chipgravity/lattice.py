"""Time-domain simulation of the dc-SQUID array.

The equations of motion in lattice units are ``M phi'' = -dV/dphi`` with
``V = sum_links cos(pi*flux_l) * (1 - cos(dphi_l))`` (or ``dphi_l**2/2`` in
harmonic mode) and mass matrix ``M = I + 2 (C_J/C0) * Laplacian``.  The
integrator is kick-drift-kick leapfrog; the mass matrix is inverted with a
tridiagonal (Thomas) solve each step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from chipgravity import _kernels
from chipgravity.circuit import (
    FluxProfile,
    SquidArrayParams,
    find_horizon,
    lattice_group_velocity,
    lattice_omega,
)
from chipgravity.constants import PHI0
from chipgravity.errors import ConfigurationError, DivergenceError, PhysicsRegimeWarning

MODES = ("full_cosine", "harmonic")
BOUNDARIES = ("fixed", "periodic", "sponge")

#: profile used when no flux bias is applied
ZERO_BIAS = FluxProfile(amplitude=0.0, front_speed=0.0)


@dataclass(frozen=True)
class SimConfig:
    """Numerical controls for lattice integration (dt in units of sqrt(L0 C0))."""

    mode: str = "full_cosine"
    dt: float = 0.02
    boundary: str = "sponge"
    sponge_width: int = 200
    sponge_strength: float = 0.05
    include_junction_capacitance: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"must be one of {MODES}", "mode")
        if self.boundary not in BOUNDARIES:
            raise ConfigurationError(f"must be one of {BOUNDARIES}", "boundary")
        if not 0 < abs(self.dt) < 0.1:
            raise ConfigurationError(f"|dt| = {abs(self.dt)} must be below the 0.1 stability margin", "dt")
        if self.boundary == "sponge":
            if self.sponge_width < 1:
                raise ConfigurationError("must be a positive number of cells", "sponge_width")
            if self.sponge_strength < 0:
                raise ConfigurationError("must be non-negative", "sponge_strength")

    def check_lattice(self, params: SquidArrayParams):
        if self.boundary == "sponge" and self.sponge_width >= params.num_cells / 4:
            raise ConfigurationError(
                f"{self.sponge_width} must be below num_cells/4 = {params.num_cells / 4}", "sponge_width"
            )


@dataclass
class LatticeState:
    """Phases and conjugate momenta (lattice units) at time t."""

    phi: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.phi = np.array(self.phi, dtype=float)
        self.p = np.array(self.p, dtype=float)
        if self.phi.ndim != 1 or self.phi.shape != self.p.shape:
            raise ValueError("phi and p must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.p))):
            raise ValueError("state contains non-finite entries")

    @classmethod
    def zeros(cls, n, t=0.0):
        return cls(np.zeros(n), np.zeros(n), t)

    @property
    def num_cells(self):
        return self.phi.size

    def copy(self):
        return LatticeState(self.phi.copy(), self.p.copy(), self.t)


@dataclass(frozen=True)
class WavePacketSpec:
    """Gaussian probe packet; k in 1/a, lengths in a."""

    center_k: float
    width_x: float
    amplitude: float
    center_x: float
    direction: str = "right"

    def __post_init__(self):
        if self.direction not in ("left", "right"):
            raise ConfigurationError("must be 'left' or 'right'", "direction")
        if not self.width_x > 0:
            raise ConfigurationError("must be positive", "width_x")
        if not 0 <= self.center_k <= math.pi:
            raise ConfigurationError("must lie in [0, pi] (units of 1/a)", "center_k")
        if abs(self.amplitude) > 0.1:
            warnings.warn("packet amplitude above 0.1 leaves the harmonic regime", PhysicsRegimeWarning)
        if self.center_k > 0 and 2 * math.pi / self.center_k < 10:
            warnings.warn("wavelength below 10a: continuum comparison not meaningful", PhysicsRegimeWarning)


class LatticeModel:
    """Precomputed integration data for a given array, profile and configuration."""

    def __init__(self, params: SquidArrayParams, profile: Optional[FluxProfile], config: SimConfig):
        config.check_lattice(params)
        self.params = params
        self.profile = ZERO_BIAS if profile is None else profile
        self.config = config
        self.n = params.num_cells
        self.periodic = config.boundary == "periodic"
        self.free = config.boundary == "sponge"
        self.cosine = config.mode == "full_cosine"
        self.r2 = 2.0 * params.capacitance_ratio if config.include_junction_capacitance else 0.0
        pr = self.profile
        self.prof = np.array([pr.amplitude, pr.floor, pr.front_speed, pr.ramp_width, pr.front_position])
        self.moving = pr.amplitude != 0.0 and pr.front_speed != 0.0
        self.num_links = self.n if self.periodic else self.n + 1
        self.link_x = np.arange(self.num_links) - 0.5
        self.damping_rate = np.zeros(self.n)
        if self.free and config.sponge_strength > 0:
            depth = np.arange(config.sponge_width, 0, -1) / config.sponge_width
            ramp = config.sponge_strength * depth**2
            self.damping_rate[: config.sponge_width] = ramp
            self.damping_rate[self.n - config.sponge_width:] = ramp[::-1]

    def stiffness(self, t):
        kap = self.profile.stiffness(self.link_x, t)
        if self.free:
            kap[0] = kap[-1] = 0.0
        return kap

    def link_differences(self, phi):
        """phi_l - phi_{l-1} per link along the last axis (ghost nodes zero for open chains)."""
        phi = np.asarray(phi, dtype=float)
        if self.periodic:
            return phi - np.roll(phi, 1, axis=-1)
        pad = np.zeros(phi.shape[:-1] + (1,))
        full = np.concatenate([pad, phi, pad], axis=-1)
        return full[..., 1:] - full[..., :-1]

    def potential_force(self, phi, t):
        d = self.link_differences(phi)
        tension = self.stiffness(t) * (np.sin(d) if self.cosine else d)
        if self.periodic:
            return np.roll(tension, -1, axis=-1) - tension
        return tension[..., 1:] - tension[..., :-1]

    def solve_mass(self, rhs):
        """M^{-1} rhs along the last axis."""
        rhs = np.asarray(rhs, dtype=float)
        if self.r2 == 0.0:
            return rhs.copy()
        rows = np.ascontiguousarray(rhs.reshape(-1, self.n))
        out = np.empty_like(rows)
        _kernels.solve_mass(rows, 0, self.n, rows.shape[0], self.r2, self.periodic, self.free,
                            np.zeros(self.n), np.zeros(self.n), out)
        return out.reshape(rhs.shape)

    def apply_mass(self, v):
        """M v along the last axis."""
        v = np.asarray(v, dtype=float)
        if self.r2 == 0.0:
            return v.copy()
        lap = 2 * v
        lap[..., 1:] -= v[..., :-1]
        lap[..., :-1] -= v[..., 1:]
        if self.periodic:
            lap[..., 0] -= v[..., -1]
            lap[..., -1] -= v[..., 0]
        elif self.free:
            lap[..., 0] -= v[..., 0]
            lap[..., -1] -= v[..., -1]
        return v + self.r2 * lap

    def advance(self, phi, p, t, nsteps, dt=None, start_step=None, track_every=0, pad=0, tol=0.0):
        """Advance (rows, N) float arrays in place; returns the final time."""
        h = self.config.dt if dt is None else dt
        m = phi.shape[0]
        if start_step is None:
            start_step = np.zeros(m, dtype=np.int64)
        use_damp = bool(np.any(self.damping_rate > 0))
        damp = np.exp(-self.damping_rate * abs(h))
        kap = np.zeros(self.num_links)
        t_end, status = _kernels.advance(
            phi, p, float(t), float(h), int(nsteps), kap, self.prof, self.moving, self.periodic,
            self.free, self.cosine, self.r2, damp, use_damp, np.asarray(start_step, dtype=np.int64),
            int(track_every), int(pad), float(tol),
        )
        if status >= 0:
            raise DivergenceError(status)
        return t_end

    def run(self, state: LatticeState, nsteps: int) -> LatticeState:
        if state.num_cells != self.n:
            raise ValueError(f"state has {state.num_cells} cells, lattice has {self.n}")
        phi = state.phi.copy().reshape(1, self.n)
        p = state.p.copy().reshape(1, self.n)
        t = self.advance(phi, p, state.t, nsteps)
        return LatticeState(phi[0], p[0], t)


def step_lattice(state: LatticeState, params: SquidArrayParams, profile: Optional[FluxProfile],
                 config: SimConfig) -> LatticeState:
    """Advance one leapfrog step."""
    return LatticeModel(params, profile, config).run(state, 1)


def evolve(state: LatticeState, params, profile, config, nsteps: int) -> LatticeState:
    """Advance ``nsteps`` leapfrog steps (bitwise identical to repeated step_lattice)."""
    return LatticeModel(params, profile, config).run(state, nsteps)


def init_wavepacket(spec: WavePacketSpec, params: SquidArrayParams, config: Optional[SimConfig] = None,
                    bias: float = 0.0) -> LatticeState:
    """Unidirectional Gaussian packet on a uniformly biased region.

    The complex packet ``A exp(-(n-x0)^2/(2 w^2)) exp(+-i k (n-x0))`` is
    given time derivative ``-i omega(k)`` per Fourier component, so the
    real part moves in one direction only.
    """
    n = params.num_cells
    x = np.arange(n, dtype=float)
    if config is not None:
        config.check_lattice(params)
        if config.boundary == "sponge":
            reach = 4 * spec.width_x
            sw = config.sponge_width
            if spec.center_x - reach < sw or spec.center_x + reach > n - 1 - sw:
                raise ConfigurationError("packet overlaps the sponge layer", "center_x")
    if spec.amplitude == 0:
        return LatticeState.zeros(n)
    sign = 1.0 if spec.direction == "right" else -1.0
    env = spec.amplitude * np.exp(-((x - spec.center_x) ** 2) / (2 * spec.width_x**2))
    field_c = env * np.exp(1j * sign * spec.center_k * (x - spec.center_x))
    q = 2 * np.pi * np.fft.fftfreq(n)
    r = params.capacitance_ratio if config is None or config.include_junction_capacitance else 0.0
    omega = lattice_omega(q, bias, r)
    # positive-frequency content moves along sign(q); keep the requested branch only
    spectrum = np.fft.fft(field_c)
    spectrum[np.sign(q) != sign] = 0.0
    field_c = np.fft.ifft(spectrum)
    phi_dot = np.fft.ifft(-1j * omega * spectrum)
    model = LatticeModel(params, None, config or SimConfig(boundary="fixed"))
    return LatticeState(field_c.real, model.apply_mass(phi_dot.real), 0.0)


def standing_mode(index: int, amplitude: float, params: SquidArrayParams) -> LatticeState:
    """Sine mode ``A sin(pi j (n+1)/(N+1))`` at rest; an exact normal mode of a fixed-end uniform chain."""
    n = params.num_cells
    if not 1 <= index <= n:
        raise ConfigurationError(f"must lie in [1, {n}]", "standing_mode")
    x = np.arange(1, n + 1)
    phi = amplitude * np.sin(math.pi * index * x / (n + 1))
    return LatticeState(phi, np.zeros(n), 0.0)


def standing_mode_frequency(index: int, params: SquidArrayParams, config: SimConfig, bias=0.0) -> float:
    """Dispersion-relation frequency of standing mode ``index`` (lattice units)."""
    r = params.capacitance_ratio if config.include_junction_capacitance else 0.0
    return float(lattice_omega(math.pi * index / (params.num_cells + 1), bias, r))


@dataclass
class ModeTrack:
    times: np.ndarray
    displacement: np.ndarray
    momentum: np.ndarray
    frequency: float
    final: LatticeState


def track_standing_mode(model: LatticeModel, state: LatticeState, index: int, periods: float,
                        samples_per_period: int = 32, expected: Optional[float] = None) -> ModeTrack:
    """Evolve a standing mode and measure its frequency from the unwrapped projection phase.

    The phase of ``q + i r/(m omega)`` (projections of phi and p onto the
    mode, with modal mass ``m``) advances by ``omega t``; its total change
    over ``periods`` oscillations divided by the elapsed time is the
    measured frequency.
    """
    n = model.n
    shape = np.sin(math.pi * index * np.arange(1, n + 1) / (n + 1)) * math.sqrt(2.0 / (n + 1))
    if expected is None:
        expected = math.sqrt(max(-(shape @ model.potential_force(shape, state.t)), 0.0)
                             / (shape @ model.apply_mass(shape)))
    modal_mass = float(shape @ model.apply_mass(shape))
    period_steps = 2 * math.pi / expected / model.config.dt
    stride = max(1, int(period_steps / samples_per_period))
    total = int(round(periods * period_steps))
    times, q, r = [], [], []

    def sample(st):
        times.append(st.t)
        q.append(float(shape @ st.phi))
        r.append(float(shape @ st.p))

    sample(state)
    done = 0
    while done < total:
        chunk = min(stride, total - done)
        state = model.run(state, chunk)
        done += chunk
        sample(state)
    times, q, r = np.array(times), np.array(q), np.array(r)
    phase = np.unwrap(np.arctan2(-r / (modal_mass * expected), q))
    freq = float((phase[-1] - phase[0]) / (times[-1] - times[0]))
    return ModeTrack(times, q, r, freq, state)


def group_velocity(k, params: SquidArrayParams, bias=0.0, include_junction_capacitance=True):
    r = params.capacitance_ratio if include_junction_capacitance else 0.0
    return lattice_group_velocity(k, bias, r)


@dataclass
class NodeObservables:
    voltage: np.ndarray
    current: np.ndarray


def node_observables(state: LatticeState, params: SquidArrayParams, profile: Optional[FluxProfile] = None,
                     config: Optional[SimConfig] = None) -> NodeObservables:
    """Node voltages (V) and SQUID currents (A); current ``I_n`` flows from node n to n+1."""
    config = SimConfig(boundary="fixed") if config is None else config
    model = LatticeModel(params, profile, config)
    vel = model.solve_mass(state.p)
    voltage = PHI0 / (2 * math.pi) * vel / params.time_unit
    acc = model.solve_mass(model.potential_force(state.phi, state.t))
    kap = model.stiffness(state.t)
    d = model.link_differences(state.phi)
    if model.periodic:
        # SQUID n joins n and n+1, i.e. link n+1 (mod N)
        idx = (np.arange(model.n) + 1) % model.n
        acc_j = acc - np.roll(acc, -1)
    else:
        idx = np.arange(model.n) + 1
        acc_next = np.append(acc[1:], 0.0)
        acc_j = acc - acc_next
    phase_j = -d[idx]
    nonlinear = np.sin(phase_j) if model.cosine else phase_j
    current = 2 * params.critical_current * (model.r2 * acc_j + kap[idx] * nonlinear)
    if model.free:
        current[-1] = 0.0
    return NodeObservables(voltage, current)


def _potential(model, phi, t):
    d = model.link_differences(phi)
    kap = model.stiffness(t)
    u = (1.0 - np.cos(d)) if model.cosine else 0.5 * d * d
    return float(np.sum(kap * u))


def total_energy_lattice(state: LatticeState, model: LatticeModel) -> float:
    kinetic = 0.5 * float(state.p @ model.solve_mass(state.p))
    return kinetic + _potential(model, state.phi, state.t)


def total_energy(state: LatticeState, params: SquidArrayParams, profile: Optional[FluxProfile] = None,
                 t: Optional[float] = None, config: Optional[SimConfig] = None) -> float:
    """Capacitive plus Josephson energy in J (zero for the zero state)."""
    config = SimConfig(boundary="fixed") if config is None else config
    model = LatticeModel(params, profile, config)
    if t is not None and t != state.t:
        state = LatticeState(state.phi, state.p, t)
    return total_energy_lattice(state, model) * params.energy_unit


def injected_power(state: LatticeState, params: SquidArrayParams, profile: FluxProfile,
                   config: Optional[SimConfig] = None) -> float:
    """Explicit time derivative of the energy from the moving bias (W)."""
    config = SimConfig(boundary="fixed") if config is None else config
    model = LatticeModel(params, profile, config)
    d = model.link_differences(state.phi)
    flux = profile.flux(model.link_x, state.t)
    dkap = -math.pi * np.sin(math.pi * flux) * profile.flux_dt(model.link_x, state.t)
    if model.free:
        dkap[0] = dkap[-1] = 0.0
    u = (1.0 - np.cos(d)) if model.cosine else 0.5 * d * d
    return float(np.sum(dkap * u)) * params.energy_unit / params.time_unit


def shadow_energy(state: LatticeState, model: LatticeModel) -> float:
    """Exactly conserved leapfrog energy for a static harmonic lattice (lattice units).

    For the map with stiffness K and mass M the invariant is
    ``p M^-1 p / 2 + phi (K - h^2/4 K M^-1 K) phi / 2``.
    """
    h = model.config.dt
    kphi = -model.potential_force(state.phi, state.t)
    return 0.5 * float(state.p @ model.solve_mass(state.p)) + 0.5 * float(
        state.phi @ kphi - 0.25 * h * h * kphi @ model.solve_mass(kphi)
    )


@dataclass
class Trajectory:
    states: List[LatticeState]
    horizon_times: np.ndarray
    horizon_positions: np.ndarray

    @property
    def times(self):
        return np.array([s.t for s in self.states])


def evolve_with_front(initial: LatticeState, params: SquidArrayParams, profile: FluxProfile,
                      config: SimConfig, t_final: float, stride: int = 100) -> Trajectory:
    """Evolve through the moving front, keeping every ``stride``-th state and the horizon track."""
    model = LatticeModel(params, profile, config)
    nsteps = int(round((t_final - initial.t) / config.dt))
    if nsteps < 0:
        raise ConfigurationError("t_final precedes the initial time", "t_final")
    states = [initial.copy()]
    state = initial
    done = 0
    while done < nsteps:
        chunk = min(stride, nsteps - done)
        try:
            state = model.run(state, chunk)
        except DivergenceError as err:
            raise DivergenceError(done + err.step) from None
        done += chunk
        states.append(state)
    ht, hx = [], []
    if 0 < profile.front_speed < 1:
        for s in states:
            x_h = find_horizon(profile, params, s.t)
            if x_h is not None:
                ht.append(s.t)
                hx.append(x_h)
    return Trajectory(states, np.array(ht), np.array(hx))
