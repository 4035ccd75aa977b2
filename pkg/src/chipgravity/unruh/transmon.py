"""Charge-basis diagonalisation of the transmon island."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ..errors import CutoffError, ParameterError

GAP_TOL = 1e-10


@dataclass(frozen=True)
class TransmonSpec:
    """Lowest transmon levels (J) and the 0-1 charge matrix element."""

    charge_cutoff: int
    eigenvalues: np.ndarray
    qubit_gap: float
    charge_matrix_element: complex
    cutoff_shift: float = 0.0

    def __post_init__(self):
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ParameterError("eigenvalues must be ascending")
        if not self.qubit_gap > 0:
            raise ParameterError("qubit gap must be positive")


def _diagonalise(charging_energy, josephson_energy, n_max, levels):
    n = np.arange(-n_max, n_max + 1, dtype=float)
    diag = charging_energy * n**2
    off = np.full(n.size - 1, -0.5 * josephson_energy)
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, levels - 1))
    return vals, vecs, n


def transmon_levels(charging_energy: float, josephson_energy: float, n_max: int = 30,
                    levels: int = 6) -> TransmonSpec:
    """Diagonalise E_C n^2 - E_J cos(phi) at zero offset charge.

    Energies are in joules (any consistent unit works).  The cutoff is
    checked by repeating the calculation with ``2 n_max`` charge states.
    """
    if n_max < 10:
        raise ParameterError(f"charge cutoff n_max={n_max} must be at least 10")
    if not charging_energy > 0:
        raise ParameterError("charging energy must be positive")
    if josephson_energy < 0:
        raise ParameterError("Josephson energy must be non-negative")
    levels = max(2, min(levels, 2 * n_max + 1))
    vals, vecs, n = _diagonalise(charging_energy, josephson_energy, n_max, levels)
    gap = vals[1] - vals[0]
    check, _, _ = _diagonalise(charging_energy, josephson_energy, 2 * n_max, levels)
    shift = abs((check[1] - check[0]) - gap) / gap
    if shift > GAP_TOL:
        raise CutoffError(f"qubit gap moved by {shift:.2e} on doubling n_max={n_max}; raise the cutoff")
    element = float(vecs[:, 1] @ (n * vecs[:, 0]))
    # only the magnitude is physical; fix the phase of |1> so the element is +i|.|
    return TransmonSpec(n_max, vals, float(gap), 1j * abs(element), float(shift))


def asymptotic_gap(charging_energy: float, josephson_energy: float) -> float:
    """Large E_J/E_C limit sqrt(2 E_J E_C) - E_C/4 for this charging-energy convention."""
    return float(np.sqrt(2 * josephson_energy * charging_energy) - charging_energy / 4)
