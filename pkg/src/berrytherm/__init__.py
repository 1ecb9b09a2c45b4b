"""Geometric-phase thermometry with a harmonic atom in a single cavity mode.

The closed-form path (:mod:`~berrytherm.diagonalization`,
:mod:`~berrytherm.berry`, :mod:`~berrytherm.thermometer`) is checked against
brute-force Fock-space computations (:mod:`~berrytherm.fock`) and a direct
integration of the von Neumann equation (:mod:`~berrytherm.evolution`).
"""
from .berry import G_factor, delta_phase, gamma_I0, gamma_In, gamma_thermal, thermal_phase
from .core import PhysicalParams, ThermalFieldState, thermal_fock_weights, thermal_squeeze_param
from .diagonalization import DressingFrame, constraint_check, forward_map, inverse_solve
from .evolution import EvolutionResult, adiabaticity_check, evolve_von_neumann, excitation_probability
from .fock import FockSpace, build_hamiltonian, numeric_holonomy, numeric_spectrum
from .thermometer import (
    SweepCurve,
    ThermometerConfig,
    dynamical_phase_budget,
    invert_temperature,
    optimal_range,
    robustness,
    sensitivity,
    sweep_delta,
)

__version__ = "0.1.0"

__all__ = [
    "DressingFrame",
    "EvolutionResult",
    "FockSpace",
    "G_factor",
    "PhysicalParams",
    "SweepCurve",
    "ThermalFieldState",
    "ThermometerConfig",
    "adiabaticity_check",
    "build_hamiltonian",
    "constraint_check",
    "delta_phase",
    "dynamical_phase_budget",
    "evolve_von_neumann",
    "excitation_probability",
    "forward_map",
    "gamma_I0",
    "gamma_In",
    "gamma_thermal",
    "invert_temperature",
    "inverse_solve",
    "numeric_holonomy",
    "numeric_spectrum",
    "optimal_range",
    "robustness",
    "sensitivity",
    "sweep_delta",
    "thermal_fock_weights",
    "thermal_phase",
    "thermal_squeeze_param",
]
