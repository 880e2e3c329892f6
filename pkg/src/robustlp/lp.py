"""Dense two-phase primal simplex.

The working representation is a dictionary ``x_B = beta - D @ x_N`` over an
inequality-form problem ``max c^T y  s.t.  A y <= b, y >= 0``.  Slack columns
are implicit, so storage is ``m x n`` even when the LP has tens of thousands
of (mostly redundant) rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL_FEAS = 1e-7
TOL_OPT = 1e-9
PIVOT_TOL = 1e-10


class Sense(str, enum.Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


class Relation(str, enum.Enum):
    GE = ">="
    LE = "<="
    EQ = "=="


class LPStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


class IterationLimitError(RuntimeError):
    """Pivot budget exhausted; points at cycling or numerical trouble."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Deterministic LP: optimize ``objective @ x`` over ``rows @ x (rel) rhs``
    and ``lower <= x <= upper``."""

    sense: Sense
    objective: np.ndarray
    rows: np.ndarray
    relations: tuple[Relation, ...]
    rhs: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self) -> None:
        c = np.array(self.objective, dtype=float).reshape(-1)
        n = c.size
        rows = np.array(self.rows, dtype=float)
        if rows.size == 0:
            rows = rows.reshape(0, n)
        if rows.ndim != 2 or rows.shape[1] != n:
            raise ValueError(f"rows must have shape (m, {n}), got {rows.shape}")
        m = rows.shape[0]
        rhs = np.array(self.rhs, dtype=float).reshape(-1)
        if rhs.size != m:
            raise ValueError(f"rhs must have length {m}, got {rhs.size}")
        if not np.all(np.isfinite(rhs)):
            raise ValueError("rhs must be finite")
        rels = tuple(Relation(r) for r in self.relations)
        if len(rels) != m:
            raise ValueError(f"relations must have length {m}, got {len(rels)}")
        lower = np.zeros(n) if self.lower is None else np.array(self.lower, dtype=float).reshape(-1)
        upper = np.full(n, np.inf) if self.upper is None else np.array(self.upper, dtype=float).reshape(-1)
        if lower.size != n or upper.size != n:
            raise ValueError("variable bounds must have length n")
        object.__setattr__(self, "sense", Sense(self.sense))
        object.__setattr__(self, "objective", _readonly(c))
        object.__setattr__(self, "rows", _readonly(rows))
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "rhs", _readonly(rhs))
        object.__setattr__(self, "lower", _readonly(lower))
        object.__setattr__(self, "upper", _readonly(upper))

    @property
    def n(self) -> int:
        return self.objective.size

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    def with_rows(self, rows, relations: Sequence[Relation], rhs) -> "LinearProgram":
        rows = np.asarray(rows, dtype=float).reshape(-1, self.n)
        return LinearProgram(
            self.sense,
            self.objective,
            np.vstack([self.rows, rows]),
            self.relations + tuple(relations),
            np.concatenate([self.rhs, np.asarray(rhs, dtype=float).reshape(-1)]),
            self.lower,
            self.upper,
        )


@dataclass(frozen=True, eq=False)
class LPResult:
    status: LPStatus
    x: np.ndarray | None = None
    objective_value: float | None = None
    iterations: int = 0


@dataclass(frozen=True)
class FeasibilityReport:
    max_violation: float
    violating_rows: tuple[int, ...]

    @property
    def feasible(self) -> bool:
        return not self.violating_rows


def row_violations(lp: LinearProgram, x) -> np.ndarray:
    """Per-row amount by which ``x`` misses each constraint (0 when satisfied)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (lp.n,):
        raise ValueError(f"x must have length {lp.n}")
    lhs = lp.rows @ x
    viol = np.zeros(lp.m)
    for i, rel in enumerate(lp.relations):
        gap = lhs[i] - lp.rhs[i]
        if rel is Relation.GE:
            viol[i] = max(0.0, -gap)
        elif rel is Relation.LE:
            viol[i] = max(0.0, gap)
        else:
            viol[i] = abs(gap)
    return viol


def check_feasible(lp: LinearProgram, x, tol: float = TOL_FEAS) -> FeasibilityReport:
    viol = row_violations(lp, x)
    worst = float(viol.max()) if viol.size else 0.0
    return FeasibilityReport(worst, tuple(int(i) for i in np.flatnonzero(viol > tol)))


class _Standardized:
    """Affine change of variables ``x = offset + T @ y`` with ``y >= 0``."""

    def __init__(self, lp: LinearProgram):
        n = lp.n
        cols: list[tuple[int, float]] = []
        offset = np.zeros(n)
        ub: list[tuple[int, float]] = []
        for j in range(n):
            lo, hi = lp.lower[j], lp.upper[j]
            if np.isfinite(lo):
                offset[j] = lo
                cols.append((j, 1.0))
                if np.isfinite(hi):
                    ub.append((len(cols) - 1, hi - lo))
            elif np.isfinite(hi):
                offset[j] = hi
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        T = np.zeros((n, len(cols)))
        for k, (j, s) in enumerate(cols):
            T[j, k] = s
        self.T = T
        self.offset = offset
        self.ub = ub

    def le_rows(self, rows: np.ndarray, relations: Sequence[Relation], rhs: np.ndarray):
        """Map original rows to ``A y <= b`` form (EQ becomes two rows)."""
        A = rows @ self.T
        b = rhs - rows @ self.offset
        rels = np.array([r.value for r in relations], dtype=object)
        le = rels == Relation.LE.value
        ge = rels == Relation.GE.value
        eq = rels == Relation.EQ.value
        parts_A = [A[le], -A[ge], A[eq], -A[eq]]
        parts_b = [b[le], -b[ge], b[eq], -b[eq]]
        return np.vstack(parts_A), np.concatenate(parts_b)

    def to_original(self, y: np.ndarray) -> np.ndarray:
        return self.offset + self.T @ y


class Tableau:
    """Simplex dictionary for one LP; supports appending rows and re-solving.

    Variable ids: ``0..ny-1`` are structural, larger ids are slacks (and the
    phase-one artificial while it exists).
    """

    def __init__(self, lp: LinearProgram, max_iter: int | None = None):
        self.lp = lp
        self._std = _Standardized(lp)
        self.max_iter = max_iter
        self.iterations = 0
        self.status: LPStatus | None = None
        sign = 1.0 if lp.sense is Sense.MAXIMIZE else -1.0
        self._cost = sign * (lp.objective @ self._std.T)
        self._ny = self._cost.size

        A, b = self._std.le_rows(lp.rows, lp.relations, lp.rhs)
        if self._std.ub:
            U = np.zeros((len(self._std.ub), self._ny))
            ub_rhs = np.empty(len(self._std.ub))
            for i, (k, width) in enumerate(self._std.ub):
                U[i, k] = 1.0
                ub_rhs[i] = width
            A = np.vstack([A, U])
            b = np.concatenate([b, ub_rhs])
        self.D = np.array(A, dtype=float).reshape(-1, self._ny)
        self.beta = np.array(b, dtype=float)
        self.basis = np.arange(self._ny, self._ny + self.beta.size)
        self.nonbasis = np.arange(self._ny)
        self._next_id = self._ny + self.beta.size
        self.d = np.zeros(self._ny)
        self.z0 = 0.0
        self._degenerate_limit = 3 * (lp.m + lp.n)

    # -- bookkeeping -------------------------------------------------------

    def _budget(self) -> int:
        if self.max_iter is not None:
            return self.max_iter
        return 1000 + 50 * (self.beta.size + self.nonbasis.size)

    def _tick(self) -> None:
        self.iterations += 1
        if self.iterations > self._budget():
            raise IterationLimitError(f"simplex exceeded {self._budget()} pivots")

    def _costs_of(self, ids: np.ndarray) -> np.ndarray:
        out = np.zeros(ids.size)
        structural = ids < self._ny
        out[structural] = self._cost[ids[structural]]
        return out

    def _price_out(self) -> None:
        cb = self._costs_of(self.basis)
        self.d = self._costs_of(self.nonbasis) - cb @ self.D
        self.z0 = float(cb @ self.beta)

    def _pivot(self, r: int, k: int) -> None:
        p = self.D[r, k]
        col = self.D[:, k].copy()
        row = self.D[r, :] / p
        row[k] = 1.0 / p
        beta_r = self.beta[r] / p
        self.D[:, k] = 0.0
        self.D -= np.outer(col, row)
        self.D[r, :] = row
        self.beta -= col * beta_r
        self.beta[r] = beta_r
        dk = self.d[k]
        self.d[k] = 0.0
        self.d -= dk * row
        self.z0 += dk * beta_r
        self.basis[r], self.nonbasis[k] = self.nonbasis[k], self.basis[r]

    # -- pivoting loops ----------------------------------------------------

    def _primal(self) -> bool:
        """Primal simplex from a feasible dictionary. False means unbounded."""
        bland = False
        degenerate = 0
        while True:
            cand = np.flatnonzero(self.d > TOL_OPT)
            if cand.size == 0:
                return True
            if bland:
                k = cand[np.argmin(self.nonbasis[cand])]
            else:
                k = cand[np.argmax(self.d[cand])]
            col = self.D[:, k]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return False
            ratios = np.maximum(self.beta[rows], 0.0) / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1.0 + best)]
            if bland:
                r = ties[np.argmin(self.basis[ties])]
            else:
                r = ties[np.argmax(col[ties])]
            if best <= 1e-12:
                degenerate += 1
                if degenerate > self._degenerate_limit:
                    bland = True
            else:
                degenerate = 0
            self._tick()
            self._pivot(int(r), int(k))

    def _dual(self) -> bool:
        """Dual simplex from a dual-feasible dictionary. False means infeasible."""
        while self.beta.size:
            r = int(np.argmin(self.beta))
            if self.beta[r] >= -TOL_FEAS:
                return True
            row = self.D[r, :]
            cand = np.flatnonzero(row < -PIVOT_TOL)
            if cand.size == 0:
                return False
            ratios = np.minimum(self.d[cand], 0.0) / row[cand]
            best = ratios.min()
            ties = cand[ratios <= best + 1e-12 * (1.0 + best)]
            k = ties[np.argmin(self.nonbasis[ties])]
            self._tick()
            self._pivot(r, int(k))
        return True

    def _phase_one(self) -> bool:
        if self.beta.size == 0 or self.beta.min() >= -TOL_FEAS:
            return True
        art = self._next_id
        self._next_id += 1
        self.D = np.hstack([self.D, -np.ones((self.beta.size, 1))])
        self.nonbasis = np.append(self.nonbasis, art)
        self.d = np.zeros(self.nonbasis.size)
        self.d[-1] = -1.0
        self.z0 = 0.0
        self._tick()
        self._pivot(int(np.argmin(self.beta)), self.nonbasis.size - 1)
        self._primal()
        if -self.z0 > TOL_FEAS:
            return False
        where = np.flatnonzero(self.basis == art)
        if where.size:
            r = int(where[0])
            row = np.abs(self.D[r, :])
            row[self.nonbasis == art] = 0.0
            k = int(np.argmax(row))
            if row[k] > PIVOT_TOL:
                self._tick()
                self._pivot(r, k)
            else:
                keep = np.arange(self.beta.size) != r
                self.D, self.beta, self.basis = self.D[keep], self.beta[keep], self.basis[keep]
        k = int(np.flatnonzero(self.nonbasis == art)[0])
        self.D = np.delete(self.D, k, axis=1)
        self.nonbasis = np.delete(self.nonbasis, k)
        return True

    # -- public ------------------------------------------------------------

    def solve(self) -> LPResult:
        if not self._phase_one():
            self.status = LPStatus.INFEASIBLE
            return self.result()
        self._price_out()
        self.status = LPStatus.OPTIMAL if self._primal() else LPStatus.UNBOUNDED
        return self.result()

    def add_rows(self, rows, relations: Sequence[Relation], rhs) -> LPResult:
        """Append rows and re-optimize, warm-starting from the current basis."""
        rows = np.asarray(rows, dtype=float).reshape(-1, self.lp.n)
        rhs = np.asarray(rhs, dtype=float).reshape(-1)
        relations = tuple(Relation(r) for r in relations)
        self.lp = self.lp.with_rows(rows, relations, rhs)
        if self.status is not LPStatus.OPTIMAL:
            fresh = Tableau(self.lp, self.max_iter)
            fresh.iterations = self.iterations
            self.__dict__.update(fresh.__dict__)
            return self.solve()
        A, b = self._std.le_rows(rows, relations, rhs)
        # Substitute basic structurals: y_j = beta_i - D[i] @ x_N.
        coef_full = np.zeros((A.shape[0], self._next_id))
        coef_full[:, : self._ny] = A
        basic_coef = coef_full[:, self.basis]
        new_beta = b - basic_coef @ self.beta
        new_D = coef_full[:, self.nonbasis] - basic_coef @ self.D
        new_ids = np.arange(self._next_id, self._next_id + A.shape[0])
        self._next_id += A.shape[0]
        self.D = np.vstack([self.D, new_D])
        self.beta = np.concatenate([self.beta, new_beta])
        self.basis = np.concatenate([self.basis, new_ids])
        if not self._dual():
            self.status = LPStatus.INFEASIBLE
            return self.result()
        self.status = LPStatus.OPTIMAL if self._primal() else LPStatus.UNBOUNDED
        return self.result()

    def primal_values(self) -> np.ndarray:
        y = np.zeros(self._ny)
        structural = self.basis < self._ny
        y[self.basis[structural]] = np.maximum(self.beta[structural], 0.0)
        return self._std.to_original(y)

    def result(self) -> LPResult:
        if self.status is not LPStatus.OPTIMAL:
            return LPResult(self.status, iterations=self.iterations)
        x = self.primal_values()
        return LPResult(self.status, x, float(self.lp.objective @ x), self.iterations)


def solve_lp(lp: LinearProgram, max_iter: int | None = None) -> LPResult:
    """Solve ``lp`` from scratch.

    Raises:
        IterationLimitError: if the pivot budget is exhausted.
    """
    return Tableau(lp, max_iter).solve()
