"""Logarithmic negativity across the qubit | cavity cut."""

import numpy as np

from ..errors import ParameterError

HERMITIAN_TOL = 1e-10
NEGATIVE_TOL = -1e-10


def partial_transpose_qubit(rho: np.ndarray) -> np.ndarray:
    """Transpose over the leading two-level factor of a (2N x 2N) matrix."""
    dim = rho.shape[0]
    if rho.shape != (dim, dim) or dim % 2:
        raise ParameterError(f"expected a square qubit (x) cavity matrix, got shape {rho.shape}")
    n = dim // 2
    return rho.reshape(2, n, 2, n).transpose(2, 1, 0, 3).reshape(dim, dim)


def log_negativity(rho: np.ndarray) -> float:
    """log2 of the trace norm of the partial transpose, clipped at zero."""
    rho = np.asarray(rho)
    skew = np.max(np.abs(rho - rho.conj().T))
    if skew > HERMITIAN_TOL:
        raise ParameterError(f"density matrix is not Hermitian (deviation {skew:.2e})")
    pt = partial_transpose_qubit(rho)
    norm = np.sum(np.abs(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))))
    value = float(np.log2(norm))
    if value < NEGATIVE_TOL:
        raise ParameterError(f"log negativity {value:.3e} is negative beyond round-off")
    return max(0.0, value)
