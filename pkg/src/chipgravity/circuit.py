"""SQUID-array circuit parameters, flux-front profiles and effective geometry.

Conventions: lattice quantities are dimensionless with length unit ``a``
(cell length), time unit ``sqrt(L0*C0) = a/c0`` and speeds in units of
``c0``.  Functions taking or returning SI values say so explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from chipgravity.constants import E_CHARGE, HBAR, KB, PHI0
from chipgravity.errors import ParameterError, SingularBiasError

# tanh(40) == 1.0 in double precision; beyond this the ramp is flat.
_SATURATION = 40.0


@dataclass(frozen=True)
class SquidArrayParams:
    """Fabrication constants of a dc-SQUID transmission-line lattice (SI)."""

    critical_current: float
    ground_capacitance: float
    junction_capacitance: float
    cell_length: float
    num_cells: int

    def __post_init__(self):
        for name in ("critical_current", "ground_capacitance", "junction_capacitance", "cell_length"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be positive and finite, got {value!r}")
        if int(self.num_cells) != self.num_cells or self.num_cells < 3:
            raise ParameterError(f"num_cells must be an integer >= 3, got {self.num_cells!r}")

    @property
    def inductance(self) -> float:
        """Zero-bias SQUID inductance L0 per cell (H)."""
        return PHI0 / (4 * math.pi * self.critical_current)

    @property
    def josephson_energy(self) -> float:
        """Single-junction Josephson energy E_J (J)."""
        return PHI0 * self.critical_current / (2 * math.pi)

    @property
    def time_unit(self) -> float:
        """sqrt(L0*C0) in seconds; also a/c0."""
        return math.sqrt(self.inductance * self.ground_capacitance)

    @property
    def energy_unit(self) -> float:
        """Lattice energy unit 2*E_J (J)."""
        return 2 * self.josephson_energy

    @property
    def momentum_unit(self) -> float:
        """Unit of the phase-conjugate momentum, (Phi0/2pi)^2 C0 / sqrt(L0 C0) (J s)."""
        return (PHI0 / (2 * math.pi)) ** 2 * self.ground_capacitance / self.time_unit

    @property
    def capacitance_ratio(self) -> float:
        """C_J / C0."""
        return self.junction_capacitance / self.ground_capacitance

    @property
    def cutoff_frequency(self) -> float:
        """Upper band edge 2/sqrt(L0*C0) (rad/s)."""
        return 2.0 / self.time_unit

    @property
    def impedance(self) -> float:
        """Characteristic impedance sqrt(L/C) of the zero-bias line (ohm)."""
        return math.sqrt(self.inductance / self.ground_capacitance)

    def continuum_valid(self, wavelength: float, margin: float = 0.01) -> bool:
        """True when C_J is negligible against C0*(wavelength/a)^2 (wavelength in m)."""
        return self.junction_capacitance < margin * self.ground_capacitance * (wavelength / self.cell_length) ** 2


def _check_bias(flux_frac):
    flux_frac = np.asarray(flux_frac, dtype=float)
    if np.any(np.abs(flux_frac) >= 0.5) or not np.all(np.isfinite(flux_frac)):
        raise SingularBiasError("flux bias must satisfy |Phi/Phi0| < 0.5 (SQUID inductance diverges)")
    return flux_frac


def zero_flux_speed(params: SquidArrayParams) -> float:
    """Wave speed c0 = a*sqrt(4*pi*I_c/(Phi0*C0)) in m/s."""
    return params.cell_length * math.sqrt(4 * math.pi * params.critical_current / (PHI0 * params.ground_capacitance))


def dispersion_omega(k, params: SquidArrayParams):
    """Band frequency (2/sqrt(L0 C0))*|sin(k a/2)| in rad/s for wavenumber k in 1/m."""
    k = np.asarray(k, dtype=float)
    return params.cutoff_frequency * np.abs(np.sin(0.5 * k * params.cell_length))


def effective_inductance_per_length(flux_frac, params: SquidArrayParams):
    """Flux-tuned SQUID inductance per unit length (H/m)."""
    flux_frac = _check_bias(flux_frac)
    return params.inductance / params.cell_length / np.cos(math.pi * flux_frac)


def phase_speed(flux_frac, params: SquidArrayParams):
    """Return ``(c_m_per_s, c_over_c0)`` for a uniform flux bias."""
    flux_frac = _check_bias(flux_frac)
    ratio = np.sqrt(np.cos(math.pi * flux_frac))
    return zero_flux_speed(params) * ratio, ratio


def lattice_omega(k, bias=0.0, capacitance_ratio=0.0):
    """Harmonic lattice dispersion in units of 1/sqrt(L0 C0), k in units of 1/a.

    Includes the junction-capacitance mass term; ``capacitance_ratio = 0``
    reduces to the bare band ``2 sqrt(cos(pi*bias)) |sin(k/2)|``.
    """
    s2 = np.sin(0.5 * np.asarray(k, dtype=float)) ** 2
    return 2.0 * np.sqrt(np.cos(math.pi * bias) * s2 / (1.0 + 8.0 * capacitance_ratio * s2))


def lattice_group_velocity(k, bias=0.0, capacitance_ratio=0.0):
    """d(lattice_omega)/dk in units of c0, for 0 <= k <= pi."""
    k = np.asarray(k, dtype=float)
    s2 = np.sin(0.5 * k) ** 2
    return np.sqrt(np.cos(math.pi * bias)) * np.cos(0.5 * k) * (1.0 + 8.0 * capacitance_ratio * s2) ** -1.5


@dataclass(frozen=True)
class FluxProfile:
    """Moving tanh step in the external flux, in lattice units.

    ``flux(x, t) = floor + amplitude/2 * (1 - tanh((x - x0 - u t)/w))`` is
    ``floor + amplitude`` behind the front and ``floor`` ahead of it.  The
    default width ``w = 5`` gives a step-height/max-slope length of 10 cells.
    """

    amplitude: float
    front_speed: float
    ramp_width: float = 5.0
    floor: float = 0.0
    front_position: float = 0.0

    def __post_init__(self):
        if not (0 <= self.amplitude < 0.5 and 0 <= self.floor < 0.5):
            raise ParameterError("amplitude and floor must each lie in [0, 0.5)")
        if self.amplitude + self.floor >= 0.5:
            raise SingularBiasError(
                f"amplitude + floor = {self.amplitude + self.floor} must be < 0.5 so cos(pi*flux) stays positive"
            )
        if not self.ramp_width > 0:
            raise ParameterError("ramp_width must be positive")
        if not np.isfinite(self.front_speed):
            raise ParameterError("front_speed must be finite")

    def front_center(self, t=0.0):
        return self.front_position + self.front_speed * t

    def _arg(self, x, t):
        return (np.asarray(x, dtype=float) - self.front_center(t)) / self.ramp_width

    def flux(self, x, t=0.0):
        return self.floor + 0.5 * self.amplitude * (1.0 - np.tanh(self._arg(x, t)))

    def flux_dx(self, x, t=0.0):
        return -0.5 * self.amplitude / self.ramp_width / np.cosh(self._arg(x, t)) ** 2

    def flux_dt(self, x, t=0.0):
        return -self.front_speed * self.flux_dx(x, t)

    def stiffness(self, x, t=0.0):
        """cos(pi*flux): the link stiffness relative to zero bias."""
        return np.cos(math.pi * self.flux(x, t))

    def speed(self, x, t=0.0):
        """Local phase speed in units of c0."""
        return np.sqrt(self.stiffness(x, t))

    def speed_dx(self, x, t=0.0):
        """Analytic d(speed)/dx in units of c0/a."""
        phi = self.flux(x, t)
        return -0.5 * math.pi * np.sin(math.pi * phi) * self.flux_dx(x, t) / np.sqrt(np.cos(math.pi * phi))

    @property
    def speed_behind(self):
        return math.sqrt(math.cos(math.pi * (self.floor + self.amplitude)))

    @property
    def speed_ahead(self):
        return math.sqrt(math.cos(math.pi * self.floor))


@dataclass(frozen=True)
class SpeedProfile:
    """c(x, t) generated by a flux profile on a given array."""

    profile: FluxProfile
    params: SquidArrayParams

    @property
    def base_speed(self) -> float:
        return zero_flux_speed(self.params)

    def __call__(self, x, t=0.0):
        """Speed in units of c0 at lattice coordinates."""
        return self.profile.speed(x, t)

    def si(self, x, t=0.0):
        """Speed in m/s at lattice coordinates."""
        return self.base_speed * self.profile.speed(x, t)

    def gradient(self, x, t=0.0, analytic=True):
        """d(c)/dx in 1/s at lattice coordinates (central difference step a/100 if not analytic)."""
        if analytic:
            g = self.profile.speed_dx(x, t)
        else:
            step = 0.01
            g = (self.profile.speed(np.asarray(x) + step, t) - self.profile.speed(np.asarray(x) - step, t)) / (2 * step)
        return g / self.params.time_unit


@dataclass(frozen=True)
class MetricComponents:
    """Inverse metric of the comoving wave equation, in lattice units."""

    g_tt: float
    g_tx: float
    g_xx: float

    @property
    def matrix(self):
        return np.array([[self.g_tt, self.g_tx], [self.g_tx, self.g_xx]])

    @property
    def determinant(self) -> float:
        return self.g_tt * self.g_xx - self.g_tx**2


def find_horizon(profile: FluxProfile, params: Optional[SquidArrayParams] = None, t: float = 0.0):
    """Position (lattice units) where the local speed equals the front speed, or None.

    ``params`` is accepted for symmetry with the SI helpers; the location in
    cells does not depend on it.
    """
    u = profile.front_speed
    if not 0 < u < 1:
        raise ParameterError(f"front_speed must lie in (0, 1) c0, got {u}")
    if profile.amplitude == 0 or not (profile.speed_behind <= u <= profile.speed_ahead):
        return None
    center = profile.front_center(t)
    w = profile.ramp_width
    lo, hi = center - _SATURATION * w, center + _SATURATION * w

    def mismatch(x):
        return profile.speed(x, t) - u

    # collect sign changes on a fine grid and refine the rightmost one
    grid = np.linspace(lo, hi, 4001)
    vals = mismatch(grid)
    crossings = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if crossings.size == 0:
        return None
    i = crossings[-1]
    if vals[i + 1] == 0:
        return float(grid[i + 1])
    x_h = brentq(mismatch, grid[i], grid[i + 1], xtol=1e-14 * max(1.0, abs(center)), rtol=4 * np.finfo(float).eps, maxiter=400)
    return float(x_h)


def effective_metric_at(x, profile: FluxProfile, params: Optional[SquidArrayParams] = None, u=None, t=0.0) -> MetricComponents:
    """Comoving-frame inverse metric (1/c)[[-1, u], [u, c^2 - u^2]] in lattice units."""
    u = profile.front_speed if u is None else u
    c = float(profile.speed(x, t))
    return MetricComponents(g_tt=-1.0 / c, g_tx=u / c, g_xx=(c * c - u * u) / c)


def hawking_temperature(speed_gradient: float) -> float:
    """T_H = hbar |dc/dx| / (2 pi k_B) for a gradient in 1/s."""
    if not np.isfinite(speed_gradient):
        raise ParameterError("speed gradient must be finite")
    return HBAR * abs(speed_gradient) / (2 * math.pi * KB)


def hawking_estimate(params: SquidArrayParams) -> float:
    """Order-of-magnitude T_H for a 0.1 c0 speed drop over ten cells (K)."""
    return math.sqrt(HBAR * E_CHARGE * params.critical_current / params.ground_capacitance) / (100 * math.pi * KB)


def horizon_temperature(profile: FluxProfile, params: SquidArrayParams, t: float = 0.0) -> float:
    """T_H from the analytic speed gradient at the horizon (K); 0 if none exists."""
    x_h = find_horizon(profile, params, t)
    if x_h is None:
        return 0.0
    return hawking_temperature(SpeedProfile(profile, params).gradient(x_h, t))


def surface_gravity(profile: FluxProfile, t: float = 0.0) -> float:
    """|dc/dx| at the horizon in lattice units (c0/a)."""
    x_h = find_horizon(profile, None, t)
    if x_h is None:
        raise ParameterError("profile has no horizon")
    return float(abs(profile.speed_dx(x_h, t)))
