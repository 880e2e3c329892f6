"""Pessimization loop: solve a relaxed LP, add the worst realized rows, repeat."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .lp import LPStatus, Relation, Tableau
from .model import (
    Ball,
    Box,
    FiniteScenarios,
    PerturbationModel,
    RobustSolution,
    SolveStatus,
    UncertainLP,
    WorstCase,
    instantiate,
    nominal_lp,
)

log = logging.getLogger(__name__)

DEFAULT_EPS = 1e-6
DEFAULT_MAX_ITER = 500


def worst_case_perturbation(pm: PerturbationModel, x) -> tuple[np.ndarray, float]:
    """Minimizer ``xi*`` of ``a(xi)^T x - b(xi)`` over the set, and that minimum.

    ``pm`` must be in ``>=`` form. Box and Ball use closed forms; finite
    scenario lists are enumerated (first minimizer wins).
    """
    x = np.asarray(x, dtype=float)
    slack = float(np.asarray(pm.nominal_row) @ x - pm.nominal_rhs)
    if pm.is_certain:
        return np.zeros(0), slack
    w = pm.direction_rows() @ x - pm.direction_rhs()
    s = pm.uncertainty
    if isinstance(s, Box):
        xi = -np.asarray(s.half_widths) * np.sign(w)
    elif isinstance(s, Ball):
        v = np.asarray(s.axis_scales) * w
        norm = np.linalg.norm(v)
        if norm == 0.0:
            xi = np.zeros(pm.L)
        else:
            xi = -s.radius * np.asarray(s.axis_scales) * v / norm
    elif isinstance(s, FiniteScenarios):
        pts = s.as_array()
        xi = pts[int(np.argmin(pts @ w))]
    else:
        raise TypeError(f"no worst-case oracle for {type(s).__name__}")
    return xi, slack + float(xi @ w)


def certificate(problem: UncertainLP, x) -> tuple[WorstCase, ...]:
    """Worst-case realization and margin of every constraint at ``x``."""
    out = []
    for i, pm in enumerate(problem.canonical()):
        xi, margin = worst_case_perturbation(pm, x)
        out.append(WorstCase(i, tuple(float(v) for v in xi), margin))
    return tuple(out)


@dataclass(frozen=True)
class CutRound:
    objective: float
    max_violation: float
    worst_constraint: int | None
    cuts: tuple[tuple[int, tuple[float, ...]], ...]


@dataclass
class CutLoopTrace:
    rounds: list[CutRound] = field(default_factory=list)
    converged: bool = False


def solve_by_cuts(
    problem: UncertainLP,
    eps: float = DEFAULT_EPS,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[RobustSolution, CutLoopTrace]:
    """Robust optimum by constraint generation, starting from the nominal LP.

    Every constraint whose worst-case margin is below ``-eps`` receives its
    realized worst-case row each round; the LP is re-optimized from the
    previous basis.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    pms = problem.canonical()
    tableau = Tableau(nominal_lp(problem))
    result = tableau.solve()
    trace = CutLoopTrace()
    method = "ellipsoid-cuts"

    for _ in range(max_iter):
        if result.status is not LPStatus.OPTIMAL:
            status = SolveStatus.INFEASIBLE if result.status is LPStatus.INFEASIBLE else SolveStatus.UNBOUNDED
            return RobustSolution(status, method, diagnostics=_diag(trace, tableau)), trace
        x = result.x
        cuts, rows, rhs = [], [], []
        worst, worst_i = 0.0, None
        for i, pm in enumerate(pms):
            xi, margin = worst_case_perturbation(pm, x)
            if -margin > worst:
                worst, worst_i = -margin, i
            if margin < -eps:
                row, b = instantiate(pm, xi)
                cuts.append((i, tuple(float(v) for v in xi)))
                rows.append(row)
                rhs.append(b)
        trace.rounds.append(CutRound(result.objective_value, worst, worst_i, tuple(cuts)))
        if not cuts:
            trace.converged = True
            sol = RobustSolution(
                SolveStatus.OPTIMAL,
                method,
                x,
                result.objective_value,
                certificate(problem, x),
                _diag(trace, tableau),
            )
            return sol, trace
        log.debug("round %d: objective %.6g, %d cuts", len(trace.rounds), result.objective_value, len(cuts))
        result = tableau.add_rows(rows, (Relation.GE,) * len(rows), rhs)

    if result.status is LPStatus.OPTIMAL:
        x = result.x
        sol = RobustSolution(
            SolveStatus.NOT_CONVERGED, method, x, result.objective_value, certificate(problem, x), _diag(trace, tableau)
        )
    else:
        sol = RobustSolution(SolveStatus.NOT_CONVERGED, method, diagnostics=_diag(trace, tableau))
    return sol, trace


def _diag(trace: CutLoopTrace, tableau: Tableau) -> dict:
    return {
        "rounds": len(trace.rounds),
        "cuts": sum(len(r.cuts) for r in trace.rounds),
        "constraints": tableau.lp.m,
        "iterations": tableau.iterations,
    }
