"""Circuit parameters of the FBAR-modulated qubit-cavity device and its couplings."""

import math
import warnings
from dataclasses import dataclass

from ..constants import E_CHARGE, HBAR, R_K
from ..errors import ParameterError, PhysicsRegimeWarning
from .transmon import TransmonSpec, transmon_levels

CAPACITANCE_RATIO_WARN = 0.05
DISPLACEMENT_RATIO_WARN = 0.01


@dataclass(frozen=True)
class UnruhCircuitParams:
    """SI description of the cavity, the FBAR gate capacitor and the SQUID island.

    ``josephson_energy`` is the flux-tuned E_J of the island in joules.
    """

    cavity_frequency: float
    cavity_capacitance: float
    cavity_impedance: float
    fbar_capacitance: float
    fbar_thickness: float
    drive_amplitude: float
    drive_frequency: float
    junction_capacitance: float
    josephson_energy: float

    def __post_init__(self):
        for name in ("cavity_frequency", "cavity_capacitance", "cavity_impedance", "fbar_thickness",
                     "junction_capacitance", "josephson_energy"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        for name in ("fbar_capacitance", "drive_amplitude", "drive_frequency"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")
        if self.fbar_capacitance / self.cavity_capacitance > CAPACITANCE_RATIO_WARN:
            warnings.warn(
                f"C_m0/C_c = {self.fbar_capacitance / self.cavity_capacitance:.3g} is not small; "
                "the coupling model assumes a weak gate capacitor", PhysicsRegimeWarning, stacklevel=2)
        if self.drive_amplitude / self.fbar_thickness > DISPLACEMENT_RATIO_WARN:
            warnings.warn(
                f"A/D = {self.drive_amplitude / self.fbar_thickness:.3g}; the linearised gate "
                "modulation needs A << D", PhysicsRegimeWarning, stacklevel=2)

    @property
    def total_capacitance(self) -> float:
        return 2 * self.junction_capacitance + self.fbar_capacitance

    @property
    def charging_energy(self) -> float:
        """Cooper-pair charging energy (2e)^2 / (2 C_sigma) in joules."""
        return (2 * E_CHARGE) ** 2 / (2 * self.total_capacitance)

    def transmon(self, n_max: int = 30) -> TransmonSpec:
        return transmon_levels(self.charging_energy, self.josephson_energy, n_max)


def coupling_g(circuit: UnruhCircuitParams, spec: TransmonSpec) -> complex:
    """Static cavity-qubit coupling in rad/s."""
    scale = math.sqrt(R_K / (4 * math.pi * circuit.cavity_impedance))
    ratio = circuit.fbar_capacitance / circuit.cavity_capacitance
    return complex(scale * circuit.charging_energy * ratio * spec.charge_matrix_element / HBAR)


def coupling_gm(circuit: UnruhCircuitParams, g: complex) -> complex:
    """Amplitude of the FBAR-modulated coupling, rad/s."""
    lever = 2 * circuit.junction_capacitance / circuit.total_capacitance
    return complex(lever * (circuit.drive_amplitude / circuit.fbar_thickness) * g)


def charging_capacitance(charging_energy: float, fbar_capacitance: float) -> float:
    """Junction capacitance C_J that yields ``charging_energy`` (J) with the given C_m0."""
    total = (2 * E_CHARGE) ** 2 / (2 * charging_energy)
    cj = 0.5 * (total - fbar_capacitance)
    if cj <= 0:
        raise ParameterError("C_m0 alone exceeds the total capacitance for this charging energy")
    return cj


def reference_circuit(cavity_frequency: float = 2 * math.pi * 4.74e9) -> UnruhCircuitParams:
    """Gate-coupled transmon with E_C/h = 1 GHz, E_J = 15 E_C, C_m0/C_c = 0.01 and Z_c = 50 ohm.

    The FBAR drives a 0.1 Angstrom motion across a 0.5 um gap at the
    frequency sum of cavity and qubit.
    """
    h = 2 * math.pi * HBAR
    ec = h * 1e9
    cm0 = 10e-15
    cj = charging_capacitance(ec, cm0)
    gap = transmon_levels(ec, 15 * ec).qubit_gap
    return UnruhCircuitParams(
        cavity_frequency=cavity_frequency,
        cavity_capacitance=1e-12,
        cavity_impedance=50.0,
        fbar_capacitance=cm0,
        fbar_thickness=5e-7,
        drive_amplitude=1e-11,
        drive_frequency=cavity_frequency + gap / HBAR,
        junction_capacitance=cj,
        josephson_energy=15 * ec,
    )
