"""Numerical laboratory for the mass-critical nonlinear Schrodinger equation."""
from .errors import (BadMagicError, ConfigurationError, NLSError, PayloadError, SerializationError,
                     SnapshotError, SolverError, UnsupportedModeError, VersionError)
from .grid import ComplexField, Grid, make_grid
from .diagnostics import DiagnosticRecord, conserved_quantities
from .groundstate import GroundState, solve_ground_state
from .symmetry import GroupElement, apply_group, compose, galilean_boost, inverse, pseudoconformal
from .evolve import EvolutionConfig, Termination, Trajectory, run_evolution, strang_step

__all__ = [
    "BadMagicError", "ComplexField", "ConfigurationError", "DiagnosticRecord", "EvolutionConfig",
    "Grid", "GroundState", "GroupElement", "NLSError", "PayloadError", "SerializationError",
    "SnapshotError", "SolverError", "Termination", "Trajectory", "UnsupportedModeError",
    "VersionError", "apply_group", "compose", "conserved_quantities", "galilean_boost",
    "inverse", "make_grid", "pseudoconformal", "run_evolution", "solve_ground_state",
    "strang_step",
]
