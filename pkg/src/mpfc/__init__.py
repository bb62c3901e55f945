"""Energy-stable second-order finite differences for the modified phase field crystal equation."""

from .energy import (
    EnergyBreakdown,
    discrete_energy,
    dissipation_identity_residual,
    energy_breakdown,
    modified_pseudo_energy,
    pseudo_energy,
)
from .grid import EdgeField, GridFunction, Params, cosine_modes, mean, read_snapshot, sample, wrap_index, write_snapshot
from .norms import MeanZeroField, PoissonSolver, inner_minus1, inv_laplacian, norm_minus1
from .stepper import SchemeState, SolveReport, StepReport, advance, init, integrate, run, solve_step

__all__ = [
    "EdgeField",
    "EnergyBreakdown",
    "GridFunction",
    "MeanZeroField",
    "Params",
    "PoissonSolver",
    "SchemeState",
    "SolveReport",
    "StepReport",
    "advance",
    "cosine_modes",
    "discrete_energy",
    "dissipation_identity_residual",
    "energy_breakdown",
    "init",
    "inner_minus1",
    "integrate",
    "inv_laplacian",
    "mean",
    "modified_pseudo_energy",
    "norm_minus1",
    "pseudo_energy",
    "read_snapshot",
    "run",
    "sample",
    "solve_step",
    "wrap_index",
    "write_snapshot",
]
