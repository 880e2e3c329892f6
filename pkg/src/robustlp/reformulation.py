"""Exact robust counterparts: finite scenarios, boxes (as an LP) and balls
(as conic-quadratic rows)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutting_plane import certificate
from .lp import LinearProgram, LPResult, LPStatus, Relation, row_violations, solve_lp
from .model import (
    Ball,
    Box,
    Direction,
    FiniteScenarios,
    PerturbationModel,
    RobustSolution,
    SolveStatus,
    UncertainLP,
    nominal_lp,
    require_valid,
)


class IncompatibleSetError(ValueError):
    """A builder was handed a constraint whose set it cannot reformulate."""


def _check_sets(problem: UncertainLP, kind: type, builder: str) -> list[PerturbationModel]:
    require_valid(problem)
    pms = problem.canonical()
    for i, pm in enumerate(pms):
        if not pm.is_certain and not isinstance(pm.uncertainty, kind):
            raise IncompatibleSetError(
                f"constraint {i} has a {type(pm.uncertainty).__name__} set; "
                f"{builder} needs {kind.__name__} (use another method)"
            )
    return pms


def scenario_rows(pm: PerturbationModel, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Realized rows and right-hand sides for each row of ``points``."""
    if pm.is_certain:
        return np.asarray(pm.nominal_row, dtype=float)[None, :], np.array([pm.nominal_rhs])
    points = np.asarray(points, dtype=float).reshape(-1, pm.L)
    rows = np.asarray(pm.nominal_row) + points @ pm.direction_rows()
    rhs = pm.nominal_rhs + points @ pm.direction_rhs()
    return rows, rhs


def _lp(problem: UncertainLP, rows, rhs, extra: int = 0) -> LinearProgram:
    n = problem.n
    rows = np.asarray(rows, dtype=float).reshape(-1, n + extra)
    return LinearProgram(
        problem.sense,
        np.concatenate([problem.objective, np.zeros(extra)]),
        rows,
        (Relation.GE,) * rows.shape[0],
        rhs,
        np.concatenate([problem.lower, np.zeros(extra)]),
        np.concatenate([problem.upper, np.full(extra, np.inf)]),
    )


def build_scenario_rc(problem: UncertainLP) -> LinearProgram:
    """One ``>=`` row per (constraint, scenario); duplicates are kept."""
    pms = _check_sets(problem, FiniteScenarios, "the scenario RC")
    rows, rhs = [], []
    for pm in pms:
        pts = pm.uncertainty.as_array() if not pm.is_certain else None
        r, b = scenario_rows(pm, pts)
        rows.append(r)
        rhs.append(b)
    return _lp(problem, np.vstack(rows), np.concatenate(rhs))


def build_interval_rc(problem: UncertainLP) -> LinearProgram:
    """Box RC as an LP.

    Each uncertain row ``a0^T x - sum_l rho_l |a_l^T x - b_l| >= b0`` becomes
    ``a0^T x - sum_l rho_l u_l >= b0`` with ``u_l >= +-(a_l^T x - b_l)``.
    The auxiliaries ``u`` are appended after the original variables and do
    not enter the objective.
    """
    pms = _check_sets(problem, Box, "the interval RC")
    n = problem.n
    terms: list[tuple[int, float, Direction]] = []
    for i, pm in enumerate(pms):
        if pm.is_certain:
            continue
        for rho, d in zip(pm.uncertainty.half_widths, pm.directions):
            if rho > 0 and (any(d.row) or d.rhs):
                terms.append((i, rho, d))
    k = len(terms)
    width = n + k
    rows, rhs = [], []
    main_rows = np.zeros((len(pms), width))
    for i, pm in enumerate(pms):
        main_rows[i, :n] = pm.nominal_row
    for aux, (i, rho, d) in enumerate(terms):
        main_rows[i, n + aux] = -rho
        up = np.zeros(width)
        up[:n] = -np.asarray(d.row)
        up[n + aux] = 1.0
        down = np.zeros(width)
        down[:n] = d.row
        down[n + aux] = 1.0
        rows += [up, down]
        rhs += [-d.rhs, d.rhs]
    all_rows = np.vstack([main_rows] + ([np.array(rows)] if rows else []))
    all_rhs = np.concatenate([[pm.nominal_rhs for pm in pms], rhs])
    return _lp(problem, all_rows, all_rhs, extra=k)


@dataclass(frozen=True)
class ConicQuadraticRow:
    """``linear_part^T x - omega * ||(a_l^T x - b_l)_l||_2 >= rhs``."""

    linear_part: tuple[float, ...]
    rhs: float
    quad_terms: tuple[Direction, ...]
    omega: float

    def margin(self, x) -> float:
        x = np.asarray(x, dtype=float)
        w = np.array([np.dot(d.row, x) - d.rhs for d in self.quad_terms])
        return float(np.dot(self.linear_part, x) - self.omega * np.linalg.norm(w) - self.rhs)


@dataclass(frozen=True, eq=False)
class EllipsoidRC:
    """Certain rows (and objective, bounds) as an LP plus the conic rows."""

    linear: LinearProgram
    conic_rows: tuple[ConicQuadraticRow, ...]
    conic_constraint_index: tuple[int, ...]

    def max_violation(self, x) -> float:
        viol = row_violations(self.linear, x)
        worst = float(viol.max()) if viol.size else 0.0
        for row in self.conic_rows:
            worst = max(worst, -row.margin(x))
        return worst


def build_ellipsoid_rc(problem: UncertainLP) -> EllipsoidRC:
    """Ball RC. Axis scales are folded into the directions, leaving a ball
    of radius ``omega``; zero-radius sets fall back to linear rows."""
    pms = _check_sets(problem, Ball, "the ellipsoid RC")
    lin_rows, lin_rhs, conic, index = [], [], [], []
    for i, pm in enumerate(pms):
        s = pm.uncertainty
        if pm.is_certain or s.radius == 0 or (not np.any(pm.direction_rows()) and not np.any(pm.direction_rhs())):
            lin_rows.append(pm.nominal_row)
            lin_rhs.append(pm.nominal_rhs)
            continue
        quad = tuple(
            Direction(tuple(scale * v for v in d.row), scale * d.rhs) for scale, d in zip(s.axis_scales, pm.directions)
        )
        conic.append(ConicQuadraticRow(pm.nominal_row, pm.nominal_rhs, quad, s.radius))
        index.append(i)
    linear = _lp(problem, np.array(lin_rows).reshape(-1, problem.n), lin_rhs)
    return EllipsoidRC(linear, tuple(conic), tuple(index))


@dataclass(frozen=True, eq=False)
class RobustEvaluation:
    objective: float
    margins: np.ndarray

    @property
    def worst_margin(self) -> float:
        return float(self.margins.min()) if self.margins.size else 0.0


def worst_margin(pm: PerturbationModel, x) -> float:
    """``min over xi in the set of a(xi)^T x - b(xi)`` for a ``>=`` model."""
    x = np.asarray(x, dtype=float)
    slack = float(np.dot(pm.nominal_row, x) - pm.nominal_rhs)
    if pm.is_certain:
        return slack
    w = pm.direction_rows() @ x - pm.direction_rhs()
    s = pm.uncertainty
    if isinstance(s, Box):
        return slack - float(np.abs(w) @ np.asarray(s.half_widths))
    if isinstance(s, Ball):
        return slack - s.radius * float(np.linalg.norm(np.asarray(s.axis_scales) * w))
    return slack + float((s.as_array() @ w).min())


def evaluate_robust_value(problem: UncertainLP, x) -> RobustEvaluation:
    x = np.asarray(x, dtype=float)[: problem.n]
    margins = np.array([worst_margin(pm, x) for pm in problem.canonical()])
    return RobustEvaluation(float(np.dot(problem.objective, x)), margins)


# --- solve helpers ---------------------------------------------------------------


_STATUS = {
    LPStatus.OPTIMAL: SolveStatus.OPTIMAL,
    LPStatus.INFEASIBLE: SolveStatus.INFEASIBLE,
    LPStatus.UNBOUNDED: SolveStatus.UNBOUNDED,
}


def solution_from_lp(problem: UncertainLP, lp: LinearProgram, result: LPResult, method: str, **diag) -> RobustSolution:
    diagnostics = {"constraints": lp.m, "variables": lp.n, "iterations": result.iterations, **diag}
    if result.status is not LPStatus.OPTIMAL:
        return RobustSolution(_STATUS[result.status], method, diagnostics=diagnostics)
    x = result.x[: problem.n]
    return RobustSolution(
        SolveStatus.OPTIMAL,
        method,
        x,
        float(np.dot(problem.objective, x)),
        certificate(problem, x),
        diagnostics,
    )


def solve_nominal(problem: UncertainLP) -> RobustSolution:
    lp = nominal_lp(problem)
    return solution_from_lp(problem, lp, solve_lp(lp), "nominal")


def solve_scenario(problem: UncertainLP) -> RobustSolution:
    lp = build_scenario_rc(problem)
    return solution_from_lp(problem, lp, solve_lp(lp), "scenario")


def solve_interval(problem: UncertainLP) -> RobustSolution:
    lp = build_interval_rc(problem)
    return solution_from_lp(problem, lp, solve_lp(lp), "interval")
