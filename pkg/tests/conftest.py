import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from robustlp import (
    Ball,
    Box,
    Direction,
    FiniteScenarios,
    PerturbationModel,
    UncertainConstraint,
    UncertainLP,
    solve_scenario,
)

# Coefficients of the three-variable test problem (max 5x1+3x2+4x3, two
# uncertain <= rows); see src/robustlp/problems/three_var_box.json.
THREE_VAR_ROWS = [
    ((1, 1, 2), 18, [(1, -2, 2), (2, 1, 0)]),
    ((0, 1, 1), 16, [(1, 0, -2), (1, -2, -1)]),
]


def three_var(uncertainty) -> UncertainLP:
    cons = []
    for nominal, rhs, dirs in THREE_VAR_ROWS:
        pm = PerturbationModel(nominal, rhs, tuple(Direction(d, 0.0) for d in dirs), uncertainty)
        cons.append(UncertainConstraint("<=", pm))
    return UncertainLP("max", (5, 3, 4), tuple(cons))


def three_var_box(a, b):
    return three_var(Box((a, b)))


def three_var_ellipse(a, b):
    return three_var(Ball(1.0, (a, b)))


def scenario_problem(sense, objective, rows_per_constraint, lower=None, upper=None):
    """Constraint-wise finite scenarios given as explicit (row, rhs) lists.

    Each constraint uses unit directions over [a; b] so that the scenario
    points are the realized data themselves.
    """
    n = len(objective)
    cons = []
    for scenarios in rows_per_constraint:
        dirs = [Direction(tuple(np.eye(n)[j]), 0.0) for j in range(n)] + [Direction((0.0,) * n, 1.0)]
        points = [tuple(row) + (rhs,) for row, rhs in scenarios]
        pm = PerturbationModel((0.0,) * n, 0.0, tuple(dirs), FiniteScenarios(points))
        cons.append(UncertainConstraint(">=", pm))
    return UncertainLP(sense, objective, tuple(cons), lower, upper)


def brute_force_lp(sense, c, rows, relations, rhs):
    """Vertex/ray enumeration for an LP with x >= 0.

    Returns (status, value). Independent of the simplex code: it only uses
    dense linear solves.
    """
    c = np.asarray(c, float)
    n = c.size
    G, h = [], []
    for a, rel, b in zip(rows, relations, rhs):
        a = np.asarray(a, float)
        if rel in (">=", "=="):
            G.append(a)
            h.append(b)
        if rel in ("<=", "=="):
            G.append(-a)
            h.append(-b)
    G = np.array(G + list(np.eye(n))).reshape(-1, n)
    h = np.array(h + [0.0] * n)
    sign = 1.0 if sense == "min" else -1.0

    best = None
    for idx in itertools.combinations(range(len(G)), n):
        M = G[list(idx)]
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, h[list(idx)])
        if np.all(G @ x >= h - 1e-9):
            v = sign * c @ x
            best = v if best is None else min(best, v)
    if best is None:
        return "Infeasible", None
    # extreme rays: vertices of {d : G d >= 0, sum d = 1}
    ones = np.ones((1, n))
    for idx in itertools.combinations(range(len(G)), n - 1):
        M = np.vstack([G[list(idx)], ones])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        d = np.linalg.solve(M, np.r_[np.zeros(n - 1), 1.0])
        if np.all(G @ d >= -1e-9) and sign * c @ d < -1e-9:
            return "Unbounded", None
    return "Optimal", sign * best


def random_lp(rng):
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 7))
    A = rng.integers(-5, 6, size=(m, n)).astype(float)
    b = rng.integers(-5, 6, size=m).astype(float)
    c = rng.integers(-5, 6, size=n).astype(float)
    rels = list(rng.choice([">=", "<=", "=="], size=m, p=[0.45, 0.45, 0.1]))
    sense = str(rng.choice(["min", "max"]))
    return sense, c, A, rels, b


def random_scenario_instance(rng):
    n = int(rng.integers(1, 5))
    m = int(rng.integers(1, 5))
    cons = []
    for _ in range(m):
        k = int(rng.integers(1, 4))
        cons.append([(rng.integers(-3, 4, n), int(rng.integers(-3, 4))) for _ in range(k)])
    return n, cons


def instance_feasible(n, rows):
    lp = scenario_problem("min", (0,) * n, [[r] for r in rows])
    return solve_scenario(lp).status.value == "Optimal"


def farkas_hull_instance(n, cons):
    """Convex-combination instance proven infeasible by a Farkas multiplier.

    Finds y >= 0 over all scenario rows with sum y*a <= 0 and sum y*b = 1,
    and returns the per-constraint weighted averages, or None if no such y
    exists.
    """
    flat = [(i, np.asarray(a, float), float(b)) for i, sc in enumerate(cons) for a, b in sc]
    A = np.array([a for _, a, _ in flat]).T
    bvec = np.array([b for _, _, b in flat])
    res = linprog(np.zeros(len(flat)), A_ub=A, b_ub=np.zeros(n), A_eq=bvec[None, :], b_eq=[1.0], bounds=(0, None))
    if res.status != 0:
        return None
    y = res.x
    rows, weights = [], []
    for i, sc in enumerate(cons):
        idx = [k for k, (j, _, _) in enumerate(flat) if j == i]
        lam = y[idx].sum()
        weights.append(lam)
        if lam > 1e-12:
            a = sum(y[k] * flat[k][1] for k in idx) / lam
            b = sum(y[k] * flat[k][2] for k in idx) / lam
        else:
            a, b = flat[idx[0]][1], flat[idx[0]][2]
        rows.append((a, b))
    return rows, np.array(weights)


_acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        number, text = marker.args
        _acceptance_results.append((number, text, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, outcome in sorted(_acceptance_results):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} {verdict}: {text}")
