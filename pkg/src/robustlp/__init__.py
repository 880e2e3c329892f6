"""Robust linear optimization under box, ball and finite-scenario uncertainty."""

from .cutting_plane import CutLoopTrace, solve_by_cuts, worst_case_perturbation
from .discretization import ConvergenceTrace, GridSpec, grid_points, refine_until_stable, solve_by_grid
from .lp import IterationLimitError, LinearProgram, LPResult, LPStatus, Relation, Sense, check_feasible, solve_lp
from .model import (
    Ball,
    Box,
    Direction,
    FiniteScenarios,
    PerturbationModel,
    RobustSolution,
    SolveStatus,
    UncertainConstraint,
    UncertainLP,
    instantiate,
    normalize_objective,
    normalize_rhs,
    validate,
)
from .problem_io import dump_problem, parse_problem
from .reformulation import (
    build_ellipsoid_rc,
    build_interval_rc,
    build_scenario_rc,
    evaluate_robust_value,
    solve_interval,
    solve_nominal,
    solve_scenario,
)

__version__ = "0.1.0"
