"""FBAR-modulated qubit-cavity model: circuit constants, master equation, steady state."""

from .coupling import UnruhCircuitParams, charging_capacitance, coupling_g, coupling_gm, reference_circuit
from .entanglement import log_negativity, partial_transpose_qubit
from .lindblad import (DensityMatrix, ObservableTrace, PeriodPropagator, basis_state, evolve_rk4,
                       ground_state, lindblad_evolve, liouvillian_parts)
from .model import RabiParams, operators, rabi_hamiltonian, reference_params
from .steady import SteadyState, SweepResult, drive_resonances, resonance_sweep, steady_state_observables
from .transmon import TransmonSpec, asymptotic_gap, transmon_levels

__all__ = [
    "DensityMatrix", "ObservableTrace", "PeriodPropagator", "RabiParams", "SteadyState", "SweepResult",
    "TransmonSpec", "UnruhCircuitParams", "asymptotic_gap", "basis_state", "charging_capacitance",
    "coupling_g", "coupling_gm", "drive_resonances", "evolve_rk4", "ground_state", "lindblad_evolve",
    "liouvillian_parts", "log_negativity", "operators", "partial_transpose_qubit", "rabi_hamiltonian",
    "reference_circuit", "reference_params", "resonance_sweep", "steady_state_observables", "transmon_levels",
]
