"""Uncertain LPs under constraint-wise affine perturbation.

Each constraint row is ``a(xi)^T x >= b(xi)`` with
``[a(xi); b(xi)] = [a0; b0] + sum_l xi_l [a_l; b_l]`` and ``xi`` ranging over
its own perturbation set (box, ball or a finite list of scenarios).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence, Union

import numpy as np

from .lp import LinearProgram, Relation, Sense


def _floats(values) -> tuple[float, ...]:
    return tuple(float(v) for v in np.asarray(values, dtype=float).reshape(-1))


# --- perturbation sets ------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """``{xi : |xi_l| <= half_widths[l]}``."""

    half_widths: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "half_widths", _floats(self.half_widths))

    @property
    def dim(self) -> int:
        return len(self.half_widths)

    def contains(self, xi, tol: float = 1e-12) -> bool:
        xi = np.asarray(xi, dtype=float)
        return xi.shape == (self.dim,) and bool(np.all(np.abs(xi) <= np.asarray(self.half_widths) + tol))


@dataclass(frozen=True)
class Ball:
    """``{xi : sum_l (xi_l / axis_scales[l])**2 <= radius**2}``.

    With ``radius=1`` and ``axis_scales=(a, b)`` this is the ellipse
    ``xi_1**2/a**2 + xi_2**2/b**2 <= 1``.
    """

    radius: float
    axis_scales: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "axis_scales", _floats(self.axis_scales))

    @classmethod
    def euclidean(cls, radius: float, dim: int) -> "Ball":
        return cls(radius, (1.0,) * dim)

    @property
    def dim(self) -> int:
        return len(self.axis_scales)

    def scaled_norm(self, xi) -> float:
        return float(np.linalg.norm(np.asarray(xi, dtype=float) / np.asarray(self.axis_scales)))

    def contains(self, xi, tol: float = 1e-12) -> bool:
        xi = np.asarray(xi, dtype=float)
        return xi.shape == (self.dim,) and self.scaled_norm(xi) <= self.radius + tol


@dataclass(frozen=True)
class FiniteScenarios:
    points: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(_floats(p) for p in self.points))

    @property
    def dim(self) -> int:
        return len(self.points[0]) if self.points else 0

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(len(self.points), self.dim)

    def contains(self, xi, tol: float = 1e-12) -> bool:
        if not self.points:
            return False
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.dim,):
            return False
        return bool(np.any(np.all(np.abs(self.as_array() - xi) <= tol, axis=1)))


UncertaintySet = Union[Box, Ball, FiniteScenarios]


# --- perturbation model -----------------------------------------------------


class Direction(NamedTuple):
    row: tuple[float, ...]
    rhs: float = 0.0


@dataclass(frozen=True)
class PerturbationModel:
    nominal_row: tuple[float, ...]
    nominal_rhs: float
    directions: tuple[Direction, ...] = ()
    uncertainty: UncertaintySet = field(default_factory=lambda: Box(()))

    def __post_init__(self):
        object.__setattr__(self, "nominal_row", _floats(self.nominal_row))
        object.__setattr__(self, "nominal_rhs", float(self.nominal_rhs))
        dirs = []
        for d in self.directions:
            if isinstance(d, Direction):
                dirs.append(Direction(_floats(d.row), float(d.rhs)))
            else:
                row, rhs = d
                dirs.append(Direction(_floats(row), float(rhs)))
        object.__setattr__(self, "directions", tuple(dirs))

    @property
    def n(self) -> int:
        return len(self.nominal_row)

    @property
    def L(self) -> int:
        return len(self.directions)

    @property
    def is_certain(self) -> bool:
        return self.L == 0

    def direction_rows(self) -> np.ndarray:
        return np.array([d.row for d in self.directions], dtype=float).reshape(self.L, self.n)

    def direction_rhs(self) -> np.ndarray:
        return np.array([d.rhs for d in self.directions], dtype=float)

    def negated(self) -> "PerturbationModel":
        return PerturbationModel(
            tuple(-v for v in self.nominal_row),
            -self.nominal_rhs,
            tuple(Direction(tuple(-v for v in d.row), -d.rhs) for d in self.directions),
            self.uncertainty,
        )

    def with_uncertainty(self, uncertainty: UncertaintySet) -> "PerturbationModel":
        return PerturbationModel(self.nominal_row, self.nominal_rhs, self.directions, uncertainty)


def instantiate(pm: PerturbationModel, xi) -> tuple[np.ndarray, float]:
    """Realized ``(row, rhs)`` at ``xi``. Membership of ``xi`` is not checked."""
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.size != pm.L:
        raise ValueError(f"xi has length {xi.size}, model has {pm.L} directions")
    row = np.asarray(pm.nominal_row) + xi @ pm.direction_rows()
    rhs = pm.nominal_rhs + float(xi @ pm.direction_rhs())
    return row, rhs


@dataclass(frozen=True)
class UncertainConstraint:
    relation: Relation
    perturbation: PerturbationModel
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "relation", Relation(self.relation))
        if self.relation is Relation.EQ:
            raise ValueError("uncertain constraints must be '>=' or '<='")

    def canonical(self) -> PerturbationModel:
        """The constraint as a ``>=`` model (``<=`` rows are negated)."""
        if self.relation is Relation.LE:
            return self.perturbation.negated()
        return self.perturbation


@dataclass(frozen=True)
class UncertainLP:
    sense: Sense
    objective: tuple[float, ...]
    constraints: tuple[UncertainConstraint, ...]
    lower: tuple[float, ...] | None = None
    upper: tuple[float, ...] | None = None
    variable_names: tuple[str, ...] | None = None
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "sense", Sense(self.sense))
        object.__setattr__(self, "objective", _floats(self.objective))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        n = len(self.objective)
        lower = (0.0,) * n if self.lower is None else _floats(self.lower)
        upper = (math.inf,) * n if self.upper is None else _floats(self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.variable_names is not None:
            object.__setattr__(self, "variable_names", tuple(self.variable_names))

    @property
    def n(self) -> int:
        return len(self.objective)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def names(self) -> tuple[str, ...]:
        if self.variable_names is not None:
            return self.variable_names
        return tuple(f"x{j + 1}" for j in range(self.n))

    def canonical(self) -> list[PerturbationModel]:
        return [c.canonical() for c in self.constraints]

    def map_sets(self, fn) -> "UncertainLP":
        """Copy with each uncertain constraint's set replaced by ``fn(i, pm)``."""
        cons = []
        for i, con in enumerate(self.constraints):
            pm = con.perturbation
            if not pm.is_certain:
                pm = pm.with_uncertainty(fn(i, pm))
            cons.append(UncertainConstraint(con.relation, pm, con.name))
        return replace(self, constraints=tuple(cons))


# --- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    constraint: int | None
    field: str
    message: str

    def __str__(self) -> str:
        where = "problem" if self.constraint is None else f"constraint {self.constraint}"
        return f"{where}: {self.field}: {self.message}"


def _finite(values: Sequence[float]) -> bool:
    return all(math.isfinite(v) for v in values)


def _set_violations(i: int, s: UncertaintySet, L: int) -> list[Violation]:
    out = []
    if isinstance(s, Box):
        if not _finite(s.half_widths) or any(h < 0 for h in s.half_widths):
            out.append(Violation(i, "set.half_widths", "half-widths must be finite and >= 0"))
    elif isinstance(s, Ball):
        if not math.isfinite(s.radius):
            out.append(Violation(i, "set.radius", "radius not finite"))
        elif s.radius < 0:
            out.append(Violation(i, "set.radius", "radius negative"))
        if not _finite(s.axis_scales) or any(a <= 0 for a in s.axis_scales):
            out.append(Violation(i, "set.axis_scales", "axis scales must be finite and > 0"))
    elif isinstance(s, FiniteScenarios):
        if not s.points:
            out.append(Violation(i, "set.points", "scenario list is empty"))
            return out
        if len({len(p) for p in s.points}) != 1:
            out.append(Violation(i, "set.points", "scenario points differ in length"))
            return out
        if not all(_finite(p) for p in s.points):
            out.append(Violation(i, "set.points", "scenario points must be finite"))
    else:
        out.append(Violation(i, "set", f"unknown set type {type(s).__name__}"))
        return out
    if L > 0 and s.dim != L:
        out.append(Violation(i, "set", f"set dimension {s.dim} != number of directions {L}"))
    return out


def validate(problem: UncertainLP) -> list[Violation]:
    """Every invariant violation in ``problem``; empty when valid."""
    out: list[Violation] = []
    n = problem.n
    if n < 1:
        out.append(Violation(None, "objective", "need at least one variable"))
    if not _finite(problem.objective):
        out.append(Violation(None, "objective", "coefficients must be finite"))
    if problem.m < 1:
        out.append(Violation(None, "constraints", "need at least one constraint"))
    if len(problem.lower) != n:
        out.append(Violation(None, "lower", f"length {len(problem.lower)} != {n}"))
    if len(problem.upper) != n:
        out.append(Violation(None, "upper", f"length {len(problem.upper)} != {n}"))
    if len(problem.lower) == n and len(problem.upper) == n:
        if any(lo > hi for lo, hi in zip(problem.lower, problem.upper)):
            out.append(Violation(None, "bounds", "lower bound exceeds upper bound"))
        if any(math.isnan(v) for v in problem.lower + problem.upper):
            out.append(Violation(None, "bounds", "bounds must not be NaN"))
    if problem.variable_names is not None and len(problem.variable_names) != n:
        out.append(Violation(None, "variables", f"{len(problem.variable_names)} names for {n} variables"))
    for i, con in enumerate(problem.constraints):
        pm = con.perturbation
        if pm.n != n:
            out.append(Violation(i, "nominal", f"row length {pm.n} != {n}"))
        if not _finite(pm.nominal_row) or not math.isfinite(pm.nominal_rhs):
            out.append(Violation(i, "nominal", "coefficients must be finite"))
        for l, d in enumerate(pm.directions):
            if len(d.row) != n:
                out.append(Violation(i, f"directions[{l}]", f"row length {len(d.row)} != {n}"))
            if not _finite(d.row) or not math.isfinite(d.rhs):
                out.append(Violation(i, f"directions[{l}]", "coefficients must be finite"))
        if not pm.is_certain or not (isinstance(pm.uncertainty, Box) and pm.uncertainty.dim == 0):
            out.extend(_set_violations(i, pm.uncertainty, pm.L))
    return out


def require_valid(problem: UncertainLP) -> None:
    problems = validate(problem)
    if problems:
        raise ValueError("invalid problem: " + "; ".join(str(v) for v in problems))


# --- normalizations -------------------------------------------------------------


def normalize_objective(problem: UncertainLP, objective_model: PerturbationModel) -> UncertainLP:
    """Move an uncertain objective into an epigraph constraint.

    ``objective_model.nominal_row`` and its direction rows describe ``c(xi)``;
    their right-hand sides are ignored.  The result has one extra free
    variable ``t`` (last) that is optimized, with ``t >= c(xi)^T x`` for
    minimization and ``t <= c(xi)^T x`` for maximization.
    """
    require_valid(problem)
    n = problem.n
    sign = -1.0 if problem.sense is Sense.MINIMIZE else 1.0
    epi = PerturbationModel(
        tuple(sign * v for v in objective_model.nominal_row) + (-sign,),
        0.0,
        tuple(Direction(tuple(sign * v for v in d.row) + (0.0,), 0.0) for d in objective_model.directions),
        objective_model.uncertainty,
    )
    cons = [_append_column(c.canonical(), 0.0, 0.0) for c in problem.constraints]
    return UncertainLP(
        problem.sense,
        (0.0,) * n + (1.0,),
        tuple(UncertainConstraint(Relation.GE, pm, c.name) for pm, c in zip(cons, problem.constraints))
        + (UncertainConstraint(Relation.GE, epi, "objective"),),
        problem.lower + (-math.inf,),
        problem.upper + (math.inf,),
        problem.names() + ("t",),
        problem.name,
    )


def _append_column(pm: PerturbationModel, nominal: float, per_direction) -> PerturbationModel:
    if np.isscalar(per_direction):
        per_direction = [per_direction] * pm.L
    return PerturbationModel(
        pm.nominal_row + (float(nominal),),
        pm.nominal_rhs,
        tuple(Direction(d.row + (float(v),), d.rhs) for d, v in zip(pm.directions, per_direction)),
        pm.uncertainty,
    )


def normalize_rhs(problem: UncertainLP) -> UncertainLP:
    """Make every direction's rhs component zero.

    Appends a variable fixed at -1 whose column carries the rhs perturbations,
    so ``a(xi)^T x + sum_l xi_l b_l * x_{n+1} >= b0``.  Drop the last
    coordinate of a solution to map it back.
    """
    require_valid(problem)
    cons = []
    for con in problem.constraints:
        pm = con.canonical()
        moved = _append_column(pm, 0.0, pm.direction_rhs() if pm.L else [])
        moved = PerturbationModel(
            moved.nominal_row,
            moved.nominal_rhs,
            tuple(Direction(d.row, 0.0) for d in moved.directions),
            moved.uncertainty,
        )
        cons.append(UncertainConstraint(Relation.GE, moved, con.name))
    return UncertainLP(
        problem.sense,
        problem.objective + (0.0,),
        tuple(cons),
        problem.lower + (-1.0,),
        problem.upper + (-1.0,),
        problem.names() + ("rhs_carrier",),
        problem.name,
    )


def nominal_lp(problem: UncertainLP) -> LinearProgram:
    """Deterministic LP at ``xi = 0`` in ``>=`` form."""
    require_valid(problem)
    pms = problem.canonical()
    return LinearProgram(
        problem.sense,
        problem.objective,
        np.array([pm.nominal_row for pm in pms], dtype=float).reshape(len(pms), problem.n),
        (Relation.GE,) * len(pms),
        [pm.nominal_rhs for pm in pms],
        problem.lower,
        problem.upper,
    )


# --- solutions --------------------------------------------------------------------


class SolveStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NOT_CONVERGED = "NotConverged"


@dataclass(frozen=True)
class WorstCase:
    constraint: int
    xi: tuple[float, ...]
    margin: float


@dataclass(frozen=True, eq=False)
class RobustSolution:
    status: SolveStatus
    method: str
    x: np.ndarray | None = None
    objective: float | None = None
    certificate: tuple[WorstCase, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL
