"""Simulator and verification suite for a measurement-fueled single-qubit engine.

A four-stroke cycle on one qubit: two finite-time driven unitary strokes, a
non-selective projective measurement that injects the fuel energy, and a
thermalization stroke.  The package executes the cycle numerically, evaluates
the closed-form energetics in terms of transition probabilities, cross-checks
the two paths, and scans the measurement-basis angles for the extrema of
extracted work, efficiency and measurement entropy change.
"""

from .cycle import (
    AnalyticEnergetics,
    CycleEngine,
    CycleRecord,
    EngineParams,
    TransitionProbs,
    analytic_energetics,
    crosscheck,
    occupation_deltas,
    run_cycle,
    transition_probabilities,
)
from .errors import ConfigurationError, InvariantViolation, ValidationError
from .measurement import MeasurementBasis, basis_kets, measure
from .propagator import (
    ConvergenceEstimate,
    DriveSpec,
    PropagatorResult,
    Segment,
    convergence_order,
    driving_hamiltonian,
    time_ordered_propagator,
)
from .qubit_algebra import (
    expectation,
    gibbs_state,
    hermitian_expm,
    pauli,
    von_neumann_entropy,
)
from .sweep import (
    Extremum,
    GridSpec,
    Objective,
    SweepTable,
    grid_sweep,
    locate_extrema,
    slice_profile,
    symmetry_residual,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"

__all__ = [
    "AnalyticEnergetics",
    "ConfigurationError",
    "ConvergenceEstimate",
    "CycleEngine",
    "CycleRecord",
    "DEFAULT_TOLERANCES",
    "DriveSpec",
    "EngineParams",
    "Extremum",
    "GridSpec",
    "InvariantViolation",
    "MeasurementBasis",
    "Objective",
    "PropagatorResult",
    "Segment",
    "SweepTable",
    "Tolerances",
    "TransitionProbs",
    "ValidationError",
    "analytic_energetics",
    "basis_kets",
    "convergence_order",
    "crosscheck",
    "driving_hamiltonian",
    "expectation",
    "gibbs_state",
    "grid_sweep",
    "hermitian_expm",
    "locate_extrema",
    "measure",
    "occupation_deltas",
    "pauli",
    "run_cycle",
    "slice_profile",
    "symmetry_residual",
    "time_ordered_propagator",
    "transition_probabilities",
    "von_neumann_entropy",
]
