import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustlp import Ball, Box, Direction, FiniteScenarios, PerturbationModel, UncertainConstraint, UncertainLP
from robustlp.problem_io import (
    ProblemFileError,
    bundled_problems,
    dump_problem,
    parse_problem,
    parse_problem_text,
    problem_to_dict,
)


def test_bundled_names():
    assert set(bundled_problems()) >= {
        "single_row_scenarios",
        "two_row_scenarios",
        "three_var_box",
        "three_var_ellipse",
        "nominal_only",
    }


def test_single_row_file():
    p = parse_problem("single_row_scenarios")
    (con,) = p.constraints
    pts = con.perturbation.uncertainty.as_array()
    rows = [tuple(round(v, 12) for v in con.perturbation.nominal_row + pt @ con.perturbation.direction_rows()) for pt in pts]
    assert sorted(rows) == [(1.99, 0.99), (2.0, 1.0), (2.01, 1.01)]


def test_three_var_box_file():
    p = parse_problem("three_var_box")
    assert p.m == 2 and p.sense.value == "max"
    assert all(isinstance(c.perturbation.uncertainty, Box) and c.perturbation.L == 2 for c in p.constraints)


def test_empty_file_is_line_one_error(tmp_path):
    f = tmp_path / "empty.json"
    f.write_text("")
    with pytest.raises(ProblemFileError) as exc:
        parse_problem(f)
    assert exc.value.line == 1


def test_syntax_error_position():
    with pytest.raises(ProblemFileError) as exc:
        parse_problem_text('{\n  "version": 1,\n  "sense": min\n}')
    assert exc.value.line == 3


def test_schema_error_names_field():
    doc = {"version": 1, "sense": "min", "objective": [1], "constraints": [{"nominal": ["a"], "rhs": 1}]}
    with pytest.raises(ProblemFileError) as exc:
        parse_problem_text(json.dumps(doc))
    assert exc.value.field == "constraints.0.nominal.0"


def test_semantic_error_names_field():
    doc = {
        "version": 1,
        "sense": "min",
        "objective": [1],
        "constraints": [
            {"nominal": [1], "rhs": 1, "directions": [{"row": [1]}], "set": {"type": "ball", "radius": -1}}
        ],
    }
    with pytest.raises(ProblemFileError) as exc:
        parse_problem_text(json.dumps(doc))
    assert exc.value.field == "constraints.0.set.radius"


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        parse_problem("/nonexistent/problem.json")


def test_bounds_strings():
    doc = {
        "version": 1,
        "sense": "min",
        "objective": [1, 1],
        "variables": [{"name": "a", "lower": "-inf", "upper": 3}, {"name": "b", "lower": None}],
        "constraints": [{"nominal": [1, 1], "rhs": 0}],
    }
    p = parse_problem_text(json.dumps(doc))
    assert p.lower == (-math.inf, 0.0) and p.upper == (3.0, math.inf)
    assert problem_to_dict(p)["variables"][0]["lower"] == "-inf"


small = st.integers(-5, 5).map(float)


@st.composite
def problems(draw):
    n = draw(st.integers(1, 3))
    cons = []
    for _ in range(draw(st.integers(1, 3))):
        L = draw(st.integers(0, 2))
        dirs = [Direction(tuple(draw(small) for _ in range(n)), draw(small)) for _ in range(L)]
        kind = draw(st.sampled_from(["box", "ball", "scenarios"]))
        if L == 0:
            s = Box(())
        elif kind == "box":
            s = Box(tuple(abs(draw(small)) for _ in range(L)))
        elif kind == "ball":
            s = Ball(abs(draw(small)), tuple(draw(st.integers(1, 4)) for _ in range(L)))
        else:
            s = FiniteScenarios([tuple(draw(small) for _ in range(L)) for _ in range(draw(st.integers(1, 3)))])
        pm = PerturbationModel(tuple(draw(small) for _ in range(n)), draw(small), dirs, s)
        cons.append(UncertainConstraint(draw(st.sampled_from([">=", "<="])), pm, draw(st.sampled_from([None, "c"]))))
    lower = tuple(draw(st.sampled_from([0.0, -math.inf, -2.0])) for _ in range(n))
    return UncertainLP(
        draw(st.sampled_from(["min", "max"])),
        tuple(draw(small) for _ in range(n)),
        tuple(cons),
        lower,
        tuple(math.inf for _ in range(n)),
        tuple(f"x{j + 1}" for j in range(n)),
        draw(st.sampled_from([None, "p"])),
    )


@settings(max_examples=100, deadline=None)
@given(problems())
def test_round_trip(p):
    text = dump_problem(p)
    q = parse_problem_text(text)
    assert q == p
    assert dump_problem(q) == text


def test_bundled_files_round_trip():
    for name in bundled_problems():
        p = parse_problem(name)
        assert parse_problem_text(dump_problem(p)) == p
