"""Offline and two-stage MILP formulations, text export and exact solvers."""
from .backend import BackendSolution, HighsBackend, highs_available
from .export import FORMATS, export_model, to_lp, to_mps, write_model
from .model import BINARY, CONTINUOUS, INTEGER, Constraint, MilpModel, Variable
from .offline import build_ntp, build_ntp2, ntp2_pairs, ntp_pairs, surrogate_delays
from .solve import (
    DEFAULT_TIME_LIMIT,
    FEASIBLE,
    INFEASIBLE,
    OPTIMAL,
    TIME_LIMIT,
    SolveResult,
    bump_matrix,
    build,
    solve_exact,
    solve_with_backend,
)
from .stochastic import (
    EQUALITY,
    INEQUALITY,
    ScenarioSet,
    SizeBudgetError,
    build_dntps,
    estimate_size,
    expected_cost,
    extract_first_stage,
    recourse_cost,
    solve_dntps,
)

__all__ = [
    "BackendSolution", "HighsBackend", "highs_available",
    "FORMATS", "export_model", "to_lp", "to_mps", "write_model",
    "BINARY", "CONTINUOUS", "INTEGER", "Constraint", "MilpModel", "Variable",
    "build_ntp", "build_ntp2", "ntp2_pairs", "ntp_pairs", "surrogate_delays",
    "DEFAULT_TIME_LIMIT", "FEASIBLE", "INFEASIBLE", "OPTIMAL", "TIME_LIMIT",
    "SolveResult", "bump_matrix", "build", "solve_exact", "solve_with_backend",
    "EQUALITY", "INEQUALITY", "ScenarioSet", "SizeBudgetError", "build_dntps",
    "estimate_size", "expected_cost", "extract_first_stage", "recourse_cost", "solve_dntps",
]
