"""Finite-time harmonic Otto cycles with quantum or classical baths.

Exact first and second moments of work, heat and entropy production from
the linear moment equations, closed-form quasistatic limits, and a Langevin
Monte Carlo estimator for cross-checking.
"""

from .correlations import ThermoStats, boundary_moments, thermo_stats
from .limit_cycle import cycle_propagator, phase, steady_state, trajectory
from .model import (
    BathKind,
    CycleParams,
    DivergentError,
    MachineType,
    MCInstabilityError,
    MomentState,
    ProcessTag,
    ValidationError,
    validate,
)
from .quasistatic import QuasistaticStats, quasistatic_stats

__version__ = "0.1.0"

__all__ = [
    "BathKind",
    "CycleParams",
    "DivergentError",
    "MachineType",
    "MCInstabilityError",
    "MomentState",
    "ProcessTag",
    "QuasistaticStats",
    "ThermoStats",
    "ValidationError",
    "boundary_moments",
    "cycle_propagator",
    "phase",
    "quasistatic_stats",
    "steady_state",
    "thermo_stats",
    "trajectory",
    "validate",
]
