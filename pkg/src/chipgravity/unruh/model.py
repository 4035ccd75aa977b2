"""Modulated Rabi model on the qubit (x) Fock space, in units hbar = omega_c = 1."""

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from ..constants import HBAR
from ..errors import ParameterError, PhysicsRegimeWarning

MIN_FOCK = 4


@dataclass(frozen=True)
class RabiParams:
    """Rates and frequencies in units of the cavity frequency.

    ``coupling`` and ``modulation`` are the complex static and modulated
    Rabi couplings; ``cavity_frequency`` (rad/s) only fixes the SI scale.
    """

    qubit_gap: float
    coupling: complex
    modulation: complex
    drive_frequency: float
    cavity_decay: float
    qubit_decay: float
    n_fock: int = 8
    cavity_frequency: float = 1.0

    def __post_init__(self):
        if int(self.n_fock) != self.n_fock or self.n_fock < MIN_FOCK:
            raise ParameterError(f"n_fock={self.n_fock} must be an integer >= {MIN_FOCK}")
        if not self.qubit_gap > 0:
            raise ParameterError("qubit gap must be positive")
        if not self.drive_frequency > 0:
            raise ParameterError("drive frequency must be positive")
        if self.cavity_decay < 0 or self.qubit_decay < 0:
            raise ParameterError("decay rates must be non-negative")
        if not self.cavity_frequency > 0:
            raise ParameterError("cavity_frequency must be positive")
        widest = max(self.cavity_decay, self.qubit_decay)
        if widest > 0 and abs(self.qubit_gap - 1.0) < 10 * widest:
            warnings.warn("qubit and cavity are degenerate within their linewidths",
                          PhysicsRegimeWarning, stacklevel=2)

    @classmethod
    def from_si(cls, cavity_frequency, qubit_gap, coupling, modulation, drive_frequency,
                cavity_decay, qubit_decay, n_fock=8):
        """From rad/s values, except ``qubit_gap`` which is an energy in joules."""
        w = float(cavity_frequency)
        return cls(qubit_gap / (HBAR * w), complex(coupling) / w, complex(modulation) / w,
                   drive_frequency / w, cavity_decay / w, qubit_decay / w, n_fock, w)

    @property
    def period(self) -> float:
        return 2 * math.pi / self.drive_frequency

    @property
    def slowest_decay(self) -> float:
        rates = [r for r in (self.cavity_decay, self.qubit_decay) if r > 0]
        if not rates:
            raise ParameterError("no dissipation: the model has no steady state")
        return min(rates)

    def with_(self, **changes) -> "RabiParams":
        return replace(self, **changes)

    def si_summary(self) -> dict:
        w = self.cavity_frequency
        return {
            "cavity_frequency_rad_s": w,
            "qubit_gap_J": self.qubit_gap * HBAR * w,
            "coupling_rad_s": [self.coupling.real * w, self.coupling.imag * w],
            "modulation_rad_s": [self.modulation.real * w, self.modulation.imag * w],
            "drive_frequency_rad_s": self.drive_frequency * w,
            "cavity_decay_per_s": self.cavity_decay * w,
            "qubit_decay_per_s": self.qubit_decay * w,
        }


def reference_params(n_fock: int = 8, drive_frequency: float = 2.202791, coupling: complex = 0.1,
                     cavity_frequency: float = 2e10) -> RabiParams:
    """Resonantly modulated qubit at 1.1 omega_c with g = 0.1, g_m = 1e-6 and gamma = 5e-6.

    The default SI scale puts the cavity decay at 1e5 per second.
    """
    return RabiParams(1.1, complex(coupling), 1e-6 + 0j, drive_frequency, 5e-6, 5e-6, n_fock,
                      cavity_frequency)


class Operators(NamedTuple):
    a: np.ndarray
    number: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    sigma_z: np.ndarray
    excited: np.ndarray


@lru_cache(maxsize=8)
def operators(n_fock: int) -> Operators:
    """Ladder and qubit operators; basis index is qubit * n_fock + photon, qubit 0 = ground."""
    a_f = np.diag(np.sqrt(np.arange(1, n_fock)), 1).astype(complex)
    eye_f = np.eye(n_fock)
    sp = np.array([[0, 0], [1, 0]], dtype=complex)
    sz = np.diag([-1.0, 1.0]).astype(complex)
    ops = Operators(
        a=np.kron(np.eye(2), a_f),
        number=np.kron(np.eye(2), a_f.conj().T @ a_f),
        sigma_plus=np.kron(sp, eye_f),
        sigma_minus=np.kron(sp.T, eye_f),
        sigma_z=np.kron(sz, eye_f),
        excited=np.kron(sp @ sp.T, eye_f),
    )
    for m in ops:
        m.setflags(write=False)
    return ops


def hamiltonian_parts(p: RabiParams):
    """(H0, H1) with H(t) = H0 + cos(omega_m t) H1."""
    ops = operators(p.n_fock)
    quad = ops.a - ops.a.conj().T

    def rabi(c):
        return -1j * c * ops.sigma_plus @ quad - 1j * np.conj(c) * ops.sigma_minus @ quad

    h0 = ops.number + 0.5 * p.qubit_gap * ops.sigma_z + rabi(p.coupling)
    return h0, rabi(p.modulation)


def rabi_hamiltonian(t: float, p: RabiParams) -> np.ndarray:
    """H(t) including the counter-rotating terms, in units of hbar omega_c."""
    h0, h1 = hamiltonian_parts(p)
    return h0 + math.cos(p.drive_frequency * t) * h1
