"""Grid discretization of the perturbation set.

Replace each constraint's set by a finite grid, solve the resulting scenario
counterpart, and refine the grid until the optimal value stops moving at the
requested number of decimal places.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import LinearProgram, Relation, solve_lp
from .model import (
    Ball,
    Box,
    FiniteScenarios,
    RobustSolution,
    SolveStatus,
    UncertainLP,
    UncertaintySet,
    require_valid,
)
from .reformulation import IncompatibleSetError, scenario_rows, solution_from_lp

DEFAULT_MAX_RESOLUTION = 257


@dataclass(frozen=True)
class GridSpec:
    """``resolution`` points per axis (box) or rings+1 (ball).

    ``include_boundary`` keeps box vertices / the outer ball ring; turning
    it off uses cell-centred points instead.
    """

    resolution: int
    include_boundary: bool = True

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("grid resolution must be >= 2")

    def refined(self) -> "GridSpec":
        return GridSpec(2 * self.resolution - 1, self.include_boundary)


def _axis(half_width: float, g: int, boundary: bool) -> np.ndarray:
    if boundary:
        return np.linspace(-half_width, half_width, g)
    return -half_width + half_width * (2 * np.arange(g) + 1) / g


def _lattice(half_widths, g: int, boundary: bool) -> np.ndarray:
    axes = [_axis(h, g, boundary) for h in half_widths]
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(axes))


def _polar(ball: Ball, g: int, boundary: bool) -> np.ndarray:
    rings = g - 1
    k = np.arange(1, rings + 1)
    radii = ball.radius * (k / rings if boundary else (k - 0.5) / rings)
    angles = 2 * np.pi * np.arange(4 * rings) / (4 * rings)
    r, t = np.meshgrid(radii, angles, indexing="ij")
    pts = np.column_stack([(r * np.cos(t)).ravel(), (r * np.sin(t)).ravel()])
    return np.vstack([np.zeros((1, 2)), pts]) * np.asarray(ball.axis_scales)


def _ball_lattice(ball: Ball, g: int, boundary: bool) -> np.ndarray:
    scales = np.asarray(ball.axis_scales)
    lattice = _lattice(ball.radius * scales, g, True)
    unit = lattice / scales
    norms = np.linalg.norm(unit, axis=1)
    # the centre keeps the grid nonempty when no lattice point fits
    inside = np.vstack([np.zeros((1, len(scales))), lattice[(norms <= ball.radius * (1 + 1e-15)) & (norms > 0)]])
    if not boundary or ball.radius == 0:
        return inside
    nz = norms > 0
    projected = lattice[nz] * (ball.radius / norms[nz])[:, None]
    return np.vstack([inside, projected])


def _fit_to_ball(ball: Ball, pts: np.ndarray) -> np.ndarray:
    # Rounding can leave boundary points a few ulps outside.
    if ball.radius == 0 or pts.size == 0:
        return pts
    norms = np.linalg.norm(pts / np.asarray(ball.axis_scales), axis=1)
    over = norms > ball.radius
    pts = pts.copy()
    pts[over] *= (ball.radius / norms[over])[:, None]
    return pts


def grid_points(uncertainty: UncertaintySet, spec: GridSpec) -> np.ndarray:
    """Grid over the set, one point per row. Finite sets return their points."""
    if isinstance(uncertainty, FiniteScenarios):
        return uncertainty.as_array()
    g, boundary = spec.resolution, spec.include_boundary
    if isinstance(uncertainty, Box):
        return _lattice(uncertainty.half_widths, g, boundary)
    if isinstance(uncertainty, Ball):
        if uncertainty.dim == 2:
            pts = _polar(uncertainty, g, boundary)
        else:
            pts = _ball_lattice(uncertainty, g, boundary)
        return _fit_to_ball(uncertainty, pts)
    raise TypeError(f"cannot grid {type(uncertainty).__name__}")


@dataclass(frozen=True, eq=False)
class GridLP:
    lp: LinearProgram
    raw_rows: int
    unique_rows: int
    points: tuple[np.ndarray, ...]


def build_grid_rc(problem: UncertainLP, spec: GridSpec) -> GridLP:
    require_valid(problem)
    rows, rhs, points = [], [], []
    for i, pm in enumerate(problem.canonical()):
        if pm.is_certain:
            pts = np.zeros((1, 0))
        else:
            if not isinstance(pm.uncertainty, (Box, Ball, FiniteScenarios)):
                raise IncompatibleSetError(f"constraint {i}: cannot grid {type(pm.uncertainty).__name__}")
            pts = grid_points(pm.uncertainty, spec)
        r, b = scenario_rows(pm, pts)
        rows.append(r)
        rhs.append(b)
        points.append(pts)
    stacked = np.hstack([np.vstack(rows), np.concatenate(rhs)[:, None]])
    unique = np.unique(stacked, axis=0)
    lp = LinearProgram(
        problem.sense,
        problem.objective,
        unique[:, :-1],
        (Relation.GE,) * unique.shape[0],
        unique[:, -1],
        problem.lower,
        problem.upper,
    )
    return GridLP(lp, stacked.shape[0], unique.shape[0], tuple(points))


def solve_by_grid(problem: UncertainLP, spec: GridSpec) -> RobustSolution:
    """Scenario RC over the grid.

    The grid is a subset of each set, so for maximization the value is an
    upper bound on the exact robust optimum (lower bound for minimization).
    """
    grid = build_grid_rc(problem, spec)
    result = solve_lp(grid.lp)
    return solution_from_lp(
        problem,
        grid.lp,
        result,
        "grid",
        constraints=grid.raw_rows,
        unique_constraints=grid.unique_rows,
        resolution=spec.resolution,
    )


@dataclass(frozen=True, eq=False)
class GridLevel:
    resolution: int
    constraints: int
    unique_constraints: int
    objective: float | None
    x: np.ndarray | None
    status: SolveStatus
    seconds: float


@dataclass
class ConvergenceTrace:
    rows: list[GridLevel] = field(default_factory=list)
    stabilized: bool = False
    final_delta: float = math.inf
    infeasible: bool = False

    @property
    def final(self) -> GridLevel | None:
        return self.rows[-1] if self.rows else None


def refine_until_stable(
    problem: UncertainLP,
    decimal_places: int = 3,
    g0: int = 2,
    max_resolution: int = DEFAULT_MAX_RESOLUTION,
    include_boundary: bool = True,
) -> tuple[ConvergenceTrace, RobustSolution | None]:
    """Solve on nested grids ``g0, 2*g0-1, ...`` until two successive optimal
    values differ by less than half a unit in the last requested decimal."""
    if decimal_places < 1:
        raise ValueError("decimal_places must be >= 1")
    threshold = 0.5 * 10.0 ** (-decimal_places)
    spec = GridSpec(g0, include_boundary)
    trace = ConvergenceTrace()
    last: RobustSolution | None = None
    while spec.resolution <= max_resolution:
        start = time.perf_counter()
        sol = solve_by_grid(problem, spec)
        level = GridLevel(
            spec.resolution,
            sol.diagnostics["constraints"],
            sol.diagnostics["unique_constraints"],
            sol.objective,
            sol.x,
            sol.status,
            time.perf_counter() - start,
        )
        trace.rows.append(level)
        if not sol.optimal:
            trace.infeasible = sol.status is SolveStatus.INFEASIBLE
            return trace, sol
        if last is not None:
            trace.final_delta = abs(sol.objective - last.objective)
            if trace.final_delta < threshold:
                trace.stabilized = True
                return trace, sol
        last = sol
        spec = spec.refined()
    return trace, last
