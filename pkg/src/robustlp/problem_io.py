"""JSON problem files (schema version 1)."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

import jsonschema

from .lp import Relation, Sense
from .model import (
    Ball,
    Box,
    Direction,
    FiniteScenarios,
    PerturbationModel,
    UncertainConstraint,
    UncertainLP,
    UncertaintySet,
    validate,
)

_number_list = {"type": "array", "items": {"type": "number"}}
_bound = {"oneOf": [{"type": "number"}, {"type": "null"}, {"enum": ["inf", "-inf"]}]}

SET_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["box", "ball", "scenarios"]},
        "half_widths": _number_list,
        "radius": {"type": "number"},
        "axis_scales": _number_list,
        "points": {"type": "array", "items": _number_list},
    },
    "allOf": [
        {"if": {"properties": {"type": {"const": "box"}}}, "then": {"required": ["half_widths"]}},
        {"if": {"properties": {"type": {"const": "ball"}}}, "then": {"required": ["radius"]}},
        {"if": {"properties": {"type": {"const": "scenarios"}}}, "then": {"required": ["points"]}},
    ],
}

PROBLEM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "sense", "objective", "constraints"],
    "properties": {
        "version": {"const": 1},
        "name": {"type": "string"},
        "comment": {"type": "string"},
        "sense": {"enum": ["min", "max"]},
        "objective": _number_list,
        "variables": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name"],
                "properties": {"name": {"type": "string"}, "lower": _bound, "upper": _bound},
            },
        },
        "constraints": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["nominal", "rhs"],
                "properties": {
                    "name": {"type": "string"},
                    "comment": {"type": "string"},
                    "relation": {"enum": [">=", "<="]},
                    "nominal": _number_list,
                    "rhs": {"type": "number"},
                    "directions": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["row"],
                            "properties": {"row": _number_list, "rhs": {"type": "number"}},
                        },
                    },
                    "set": SET_SCHEMA,
                },
            },
        },
    },
}


class ProblemFileError(ValueError):
    """Unreadable problem file; carries a position or a field path."""

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None, field: str | None = None):
        self.line, self.column, self.field = line, column, field
        where = []
        if line is not None:
            where.append(f"line {line}, column {column}")
        if field:
            where.append(f"field {field}")
        super().__init__(f"{'; '.join(where)}: {message}" if where else message)


def _bound_value(v, default: float) -> float:
    if v is None:
        return default
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    return float(v)


def _set_from_json(doc: dict, L: int) -> UncertaintySet:
    kind = doc["type"]
    if kind == "box":
        return Box(doc["half_widths"])
    if kind == "ball":
        return Ball(doc["radius"], doc.get("axis_scales", [1.0] * L))
    return FiniteScenarios(doc["points"])


def problem_from_dict(doc: dict, name: str | None = None) -> UncertainLP:
    try:
        jsonschema.validate(doc, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ProblemFileError(exc.message, field=path) from None
    n = len(doc["objective"])
    variables = doc.get("variables")
    if variables is not None and len(variables) != n:
        raise ProblemFileError(f"{len(variables)} variables for {n} objective coefficients", field="variables")
    constraints = []
    for i, c in enumerate(doc["constraints"]):
        dirs = [Direction(tuple(d["row"]), d.get("rhs", 0.0)) for d in c.get("directions", [])]
        uncertainty = _set_from_json(c["set"], len(dirs)) if "set" in c and dirs else Box(())
        pm = PerturbationModel(tuple(c["nominal"]), c["rhs"], tuple(dirs), uncertainty)
        constraints.append(UncertainConstraint(Relation(c.get("relation", ">=")), pm, c.get("name")))
    problem = UncertainLP(
        Sense(doc["sense"]),
        tuple(doc["objective"]),
        tuple(constraints),
        None if variables is None else tuple(_bound_value(v.get("lower", 0.0), 0.0) for v in variables),
        None if variables is None else tuple(_bound_value(v.get("upper"), math.inf) for v in variables),
        tuple(f"x{j + 1}" for j in range(n)) if variables is None else tuple(v["name"] for v in variables),
        doc.get("name", name),
    )
    problems = validate(problem)
    if problems:
        v = problems[0]
        field = v.field if v.constraint is None else f"constraints.{v.constraint}.{v.field}"
        raise ProblemFileError("; ".join(p.message for p in problems), field=field)
    return problem


def parse_problem_text(text: str, name: str | None = None) -> UncertainLP:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(doc, dict):
        raise ProblemFileError("top level must be an object", line=1, column=1)
    return problem_from_dict(doc, name)


def parse_problem(path) -> UncertainLP:
    """Load a problem file, or a bundled problem by name."""
    path = resolve_problem_path(path)
    return parse_problem_text(path.read_text(), name=path.stem)


def _set_to_json(s: UncertaintySet) -> dict:
    if isinstance(s, Box):
        return {"type": "box", "half_widths": list(s.half_widths)}
    if isinstance(s, Ball):
        return {"type": "ball", "radius": s.radius, "axis_scales": list(s.axis_scales)}
    return {"type": "scenarios", "points": [list(p) for p in s.points]}


def _bound_json(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def problem_to_dict(problem: UncertainLP) -> dict:
    doc: dict = {"version": 1}
    if problem.name:
        doc["name"] = problem.name
    doc["sense"] = problem.sense.value
    doc["objective"] = list(problem.objective)
    doc["variables"] = [
        {"name": name, "lower": _bound_json(lo), "upper": _bound_json(hi)}
        for name, lo, hi in zip(problem.names(), problem.lower, problem.upper)
    ]
    cons = []
    for con in problem.constraints:
        pm = con.perturbation
        item: dict = {}
        if con.name:
            item["name"] = con.name
        item["relation"] = con.relation.value
        item["nominal"] = list(pm.nominal_row)
        item["rhs"] = pm.nominal_rhs
        if pm.directions:
            item["directions"] = [{"row": list(d.row), "rhs": d.rhs} for d in pm.directions]
            item["set"] = _set_to_json(pm.uncertainty)
        cons.append(item)
    doc["constraints"] = cons
    return doc


def dump_problem(problem: UncertainLP) -> str:
    return json.dumps(problem_to_dict(problem), indent=2) + "\n"


def bundled_problems() -> list[str]:
    folder = resources.files("robustlp") / "problems"
    return sorted(p.name[: -len(".json")] for p in folder.iterdir() if p.name.endswith(".json"))


def resolve_problem_path(path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    candidate = resources.files("robustlp") / "problems" / f"{p.stem}.json"
    if candidate.is_file():
        return Path(str(candidate))
    raise FileNotFoundError(f"no such problem file or bundled problem: {path}")
