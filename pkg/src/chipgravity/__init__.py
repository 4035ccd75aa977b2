"""Numerical simulator for superconducting-circuit analogue-gravity experiments.

Two experiments are covered: pair production at a moving flux front in a
dc-SQUID transmission-line lattice, and a mechanically modulated
qubit-cavity system under a Lindblad master equation.
"""

from chipgravity.constants import CONSTANTS, PhysicalConstants
from chipgravity.errors import (
    ConfigurationError,
    CutoffError,
    DivergenceError,
    IntegrationAccuracyError,
    IntegratorResolutionError,
    ParameterError,
    PhysicsRegimeWarning,
    SingularBiasError,
)

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "PhysicalConstants",
    "ConfigurationError",
    "CutoffError",
    "DivergenceError",
    "IntegrationAccuracyError",
    "IntegratorResolutionError",
    "ParameterError",
    "PhysicsRegimeWarning",
    "SingularBiasError",
]
