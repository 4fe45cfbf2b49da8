"""Lifted trajectory games: mixed strategies over learned trajectory candidates."""

from ._liftgame import (
    BimatrixSolution,
    DegenerateSolutionError,
    GeneratorParams,
    InfeasibleError,
    LiftedSolution,
    SolverConvergenceError,
    TagEnvSpec,
    TagGame,
    TrajSolution,
    bimatrix_vjp,
    generate_references,
    init_generator,
    load_generator,
    solve_bimatrix,
    train_offline,
    verify_equilibrium,
)

__all__ = [
    "BimatrixSolution",
    "DegenerateSolutionError",
    "GeneratorParams",
    "InfeasibleError",
    "LiftedSolution",
    "SolverConvergenceError",
    "TagEnvSpec",
    "TagGame",
    "TrajSolution",
    "bimatrix_vjp",
    "generate_references",
    "init_generator",
    "load_generator",
    "solve_bimatrix",
    "train_offline",
    "verify_equilibrium",
]
