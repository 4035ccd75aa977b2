"""Physical constants (CODATA 2018 exact SI values, via scipy.constants)."""

from dataclasses import dataclass
import math

from scipy import constants as _sc

CODATA_VERSION = "CODATA 2018"


@dataclass(frozen=True)
class PhysicalConstants:
    planck: float = _sc.h
    electron_charge: float = _sc.e
    boltzmann: float = _sc.k

    @property
    def reduced_planck(self) -> float:
        return self.planck / (2 * math.pi)

    @property
    def flux_quantum(self) -> float:
        return self.planck / (2 * self.electron_charge)

    @property
    def von_klitzing(self) -> float:
        return self.planck / self.electron_charge**2

    def table(self) -> dict:
        return {
            "version": CODATA_VERSION,
            "planck_J_s": self.planck,
            "reduced_planck_J_s": self.reduced_planck,
            "electron_charge_C": self.electron_charge,
            "boltzmann_J_per_K": self.boltzmann,
            "flux_quantum_Wb": self.flux_quantum,
            "von_klitzing_ohm": self.von_klitzing,
        }


CONSTANTS = PhysicalConstants()

HBAR = CONSTANTS.reduced_planck
PHI0 = CONSTANTS.flux_quantum
KB = CONSTANTS.boltzmann
E_CHARGE = CONSTANTS.electron_charge
R_K = CONSTANTS.von_klitzing
