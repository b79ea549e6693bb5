"""Time-parallel exponential block Krylov integrator."""

from ._pebk import (
    InvalidArgument,
    ParaexpResult,
    SolverError,
    SparseOperator,
    Waveform,
    ade_exact,
    ade_operator,
    experiments,
    grid_points,
    paraexp_solve,
    run_experiment,
)

__all__ = [
    "InvalidArgument",
    "ParaexpResult",
    "SolverError",
    "SparseOperator",
    "Waveform",
    "ade_exact",
    "ade_operator",
    "experiments",
    "grid_points",
    "paraexp_solve",
    "run_experiment",
]
