import numpy as np
import pytest

from robustlp.lp import (
    IterationLimitError,
    LinearProgram,
    LPStatus,
    Relation,
    Tableau,
    check_feasible,
    solve_lp,
)

from conftest import brute_force_lp, random_lp


def test_nominal_two_variable():
    lp = LinearProgram("min", [2, 3], [[2, 1]], [">="], [1])
    res = solve_lp(lp)
    assert res.status is LPStatus.OPTIMAL
    np.testing.assert_allclose(res.x, [0.5, 0.0], atol=1e-12)
    assert res.objective_value == pytest.approx(1.0, abs=1e-12)


def test_three_realization_counterpart():
    lp = LinearProgram("min", [2, 3], [[1.99, 0.99], [2, 1], [2.01, 1.01]], [">="] * 3, [1, 1, 1])
    res = solve_lp(lp)
    np.testing.assert_allclose(res.x, [0.5025, 0.0], atol=1e-4)
    assert res.objective_value == pytest.approx(1.0050, abs=1e-4)


def test_unbounded_ray():
    lp = LinearProgram("max", [1], [[1]], [">="], [0])
    assert solve_lp(lp).status is LPStatus.UNBOUNDED
    assert solve_lp(LinearProgram("max", [1], np.zeros((0, 1)), [], [])).status is LPStatus.UNBOUNDED


def test_infeasible():
    lp = LinearProgram("min", [1, 1], [[1, 1], [1, 1]], [">=", "<="], [3, 2])
    assert solve_lp(lp).status is LPStatus.INFEASIBLE


def test_bounds_free_and_fixed_variables():
    # max x1 + x2 with x1 free, x2 in [0, 1], x1 - x2 == 1, x1 + x2 <= 4
    lp = LinearProgram(
        "max", [1, 1], [[1, -1], [1, 1]], ["==", "<="], [1, 4], lower=[-np.inf, 0], upper=[np.inf, 1]
    )
    res = solve_lp(lp)
    np.testing.assert_allclose(res.x, [2.0, 1.0], atol=1e-9)
    # variable fixed by equal bounds
    lp = LinearProgram("min", [1, 1], [[1, 1]], [">="], [0], lower=[-1, 2], upper=[-1, 5])
    res = solve_lp(lp)
    np.testing.assert_allclose(res.x, [-1.0, 2.0], atol=1e-12)
    # upper-bounded-only variable
    lp = LinearProgram("min", [1], [[1]], [">="], [-7], lower=[-np.inf], upper=[3])
    assert solve_lp(lp).x[0] == pytest.approx(-7)


def test_check_feasible_reports_violation():
    lp = LinearProgram("min", [2, 3], [[1.99, 0.99], [2, 1]], [">=", ">="], [1, 1])
    rep = check_feasible(lp, [0.5, 0.0])
    assert rep.violating_rows == (0,)
    assert rep.max_violation == pytest.approx(0.005, abs=1e-12)
    assert check_feasible(lp, [1.0, 1.0]).feasible


def test_check_feasible_equality_and_le():
    lp = LinearProgram("min", [1, 1], [[1, 1], [1, 0]], ["==", "<="], [2, 0.5])
    rep = check_feasible(lp, [1.0, 1.0])
    assert rep.violating_rows == (1,)
    assert rep.max_violation == pytest.approx(0.5)


def test_beale_cycling_example_terminates():
    # Beale's example cycles under the textbook Dantzig rule.
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    lp = LinearProgram("min", c, A, ["<="] * 3, [0, 0, 1])
    res = solve_lp(lp)
    assert res.status is LPStatus.OPTIMAL
    assert res.objective_value == pytest.approx(-0.05, abs=1e-9)


def test_iteration_limit_is_an_error():
    lp = LinearProgram("max", [1, 1, 1], np.eye(3), ["<="] * 3, [1, 1, 1])
    with pytest.raises(IterationLimitError):
        solve_lp(lp, max_iter=1)


def test_objective_matches_returned_point():
    lp = LinearProgram("max", [5, 3, 4], [[1, 1, 2], [0, 1, 1]], ["<=", "<="], [18, 16])
    res = solve_lp(lp)
    assert res.objective_value == pytest.approx(float(lp.objective @ res.x), abs=1e-12)


def test_deterministic():
    rng = np.random.default_rng(7)
    A = rng.integers(-5, 6, size=(6, 5))
    lp = LinearProgram("min", rng.integers(0, 6, 5), A, [">="] * 6, rng.integers(-5, 6, 6))
    a, b = solve_lp(lp), solve_lp(lp)
    assert a.status == b.status and a.iterations == b.iterations
    if a.x is not None:
        assert np.array_equal(a.x, b.x)


def test_warm_start_matches_cold_solve():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(2, 5))
        base = LinearProgram("max", rng.integers(1, 6, n), np.ones((1, n)), ["<="], [10])
        tab = Tableau(base)
        tab.solve()
        extra = rng.integers(-3, 6, size=(3, n))
        rhs = rng.integers(1, 10, 3)
        warm = tab.add_rows(extra, ["<="] * 3, rhs)
        cold = solve_lp(base.with_rows(extra, [Relation.LE] * 3, rhs))
        assert warm.status == cold.status
        if cold.status is LPStatus.OPTIMAL:
            assert warm.objective_value == pytest.approx(cold.objective_value, abs=1e-9)


def test_random_lps_agree_with_vertex_enumeration():
    rng = np.random.default_rng(2024)
    counts = {"Optimal": 0, "Infeasible": 0, "Unbounded": 0}
    for _ in range(150):
        sense, c, A, rels, b = random_lp(rng)
        status, value = brute_force_lp(sense, c, A, rels, b)
        res = solve_lp(LinearProgram(sense, c, A, rels, b))
        assert res.status.value == status
        counts[status] += 1
        if status == "Optimal":
            assert res.objective_value == pytest.approx(value, abs=1e-7)
            assert check_feasible(LinearProgram(sense, c, A, rels, b), res.x).feasible
    assert all(v > 0 for v in counts.values())


def test_large_redundant_row_set():
    # tens of thousands of rows, a handful of columns
    t = np.linspace(0, 2 * np.pi, 40000, endpoint=False)
    rows = np.column_stack([np.cos(t), np.sin(t)])
    lp = LinearProgram("max", [1, 1], rows, ["<="] * t.size, np.ones(t.size), lower=[-np.inf, -np.inf])
    res = solve_lp(lp)
    assert res.objective_value == pytest.approx(np.sqrt(2), abs=1e-6)
