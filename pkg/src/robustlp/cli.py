"""Command-line front end.

Exit codes: 0 Optimal, 2 Infeasible, 3 Unbounded, 4 NotConverged,
5 ParseError, 6 UsageError.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass


from .cutting_plane import DEFAULT_EPS, DEFAULT_MAX_ITER, solve_by_cuts
from .discretization import DEFAULT_MAX_RESOLUTION, GridSpec, grid_points, refine_until_stable, solve_by_grid
from .lp import IterationLimitError, Sense
from .model import Ball, Box, RobustSolution, SolveStatus, UncertainLP, UncertaintySet, validate
from .problem_io import ProblemFileError, bundled_problems, parse_problem, parse_problem_text, resolve_problem_path
from .reformulation import IncompatibleSetError, solve_interval, solve_nominal, solve_scenario

EXIT_OPTIMAL = 0
EXIT_INFEASIBLE = 2
EXIT_UNBOUNDED = 3
EXIT_NOT_CONVERGED = 4
EXIT_PARSE_ERROR = 5
EXIT_USAGE_ERROR = 6

EXIT_CODES = {
    SolveStatus.OPTIMAL: EXIT_OPTIMAL,
    SolveStatus.INFEASIBLE: EXIT_INFEASIBLE,
    SolveStatus.UNBOUNDED: EXIT_UNBOUNDED,
    SolveStatus.NOT_CONVERGED: EXIT_NOT_CONVERGED,
}

METHODS = ("nominal", "scenario", "interval", "ellipsoid-cuts", "grid")
CSV_HEADER = ("instance", "geometry", "method", "objective", "constraints", "iterations", "seconds", "status")

log = logging.getLogger("robustlp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    return f"{float(v):.6g}"


# --- running one method ---------------------------------------------------------


@dataclass
class Outcome:
    solution: RobustSolution
    seconds: float
    trace: object = None


def run_method(problem: UncertainLP, method: str, args) -> Outcome:
    start = time.perf_counter()
    trace = None
    if method == "nominal":
        sol = solve_nominal(problem)
    elif method == "scenario":
        sol = solve_scenario(problem)
    elif method == "interval":
        sol = solve_interval(problem)
    elif method == "ellipsoid-cuts":
        sol, trace = solve_by_cuts(problem, eps=args.eps, max_iter=args.max_iter)
    elif method == "grid":
        if args.grid is not None:
            sol = solve_by_grid(problem, GridSpec(args.grid))
        else:
            trace, sol = refine_until_stable(problem, args.decimals, max_resolution=args.max_resolution)
            if sol is None:
                sol = RobustSolution(SolveStatus.NOT_CONVERGED, "grid")
            elif sol.optimal and not trace.stabilized:
                sol = RobustSolution(
                    SolveStatus.NOT_CONVERGED, "grid", sol.x, sol.objective, sol.certificate, sol.diagnostics
                )
            if sol.diagnostics is not None:
                sol.diagnostics["levels"] = len(trace.rows)
    else:
        raise UsageError(f"unknown method {method!r}")
    return Outcome(sol, time.perf_counter() - start, trace)


def _iterations(sol: RobustSolution) -> int | None:
    d = sol.diagnostics or {}
    return d.get("iterations")


# --- solve ----------------------------------------------------------------------


def _solution_doc(problem: UncertainLP, method: str, out: Outcome) -> dict:
    sol = out.solution
    doc = {
        "instance": problem.name,
        "method": method,
        "status": sol.status.value,
        "objective": sol.objective,
        "x": None if sol.x is None else dict(zip(problem.names(), map(float, sol.x))),
        "certificate": [
            {"constraint": w.constraint, "xi": list(w.xi), "margin": w.margin} for w in sol.certificate
        ],
        "diagnostics": {**(sol.diagnostics or {}), "seconds": out.seconds},
    }
    trace = out.trace
    if trace is not None and hasattr(trace, "rounds"):
        doc["trace"] = [
            {"objective": r.objective, "max_violation": r.max_violation, "cuts": [c for c, _ in r.cuts]}
            for r in trace.rounds
        ]
        doc["converged"] = trace.converged
    elif trace is not None:
        doc["trace"] = [
            {
                "resolution": lv.resolution,
                "constraints": lv.constraints,
                "unique_constraints": lv.unique_constraints,
                "objective": lv.objective,
                "status": lv.status.value,
            }
            for lv in trace.rows
        ]
        doc["stabilized"] = trace.stabilized
        doc["final_delta"] = None if math.isinf(trace.final_delta) else trace.final_delta
    return doc


def _f4(v: float) -> str:
    text = f"{v:.4f}"
    return "0.0000" if text == "-0.0000" else text


def _solution_table(doc: dict) -> str:
    lines = [
        f"instance   {doc['instance']}",
        f"method     {doc['method']}",
        f"status     {doc['status']}",
    ]
    if doc["objective"] is not None:
        lines.append(f"objective  {_f4(doc['objective'])}")
    if doc["x"]:
        lines.append("solution   " + "  ".join(f"{k}={_f4(v)}" for k, v in doc["x"].items()))
    if doc.get("trace") and doc["method"] == "grid":
        lines.append("")
        lines.append(f"{'grid':>6} {'constraints':>12} {'unique':>8} {'objective':>12}")
        for row in doc["trace"]:
            obj = "-" if row["objective"] is None else f"{row['objective']:.4f}"
            lines.append(f"{row['resolution']:>6} {row['constraints']:>12} {row['unique_constraints']:>8} {obj:>12}")
    if doc["certificate"]:
        lines.append("")
        lines.append("worst-case realizations")
        for w in doc["certificate"]:
            xi = ", ".join(_f4(v) for v in w["xi"])
            lines.append(f"  constraint {w['constraint']}: xi=({xi}) margin={_f4(w['margin'])}")
    return "\n".join(lines) + "\n"


def _write(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    problem = parse_problem(args.problem)
    out = run_method(problem, args.method, args)
    doc = _solution_doc(problem, args.method, out)
    if args.format == "json":
        text = json.dumps(doc, indent=2) + "\n"
    elif args.format == "csv":
        rows = [_csv_row(problem.name, "-", args.method, out, timing=not args.no_timing)]
        text = _csv_text(rows, extra=False)
    else:
        text = _solution_table(doc)
    _write(text, args.out)
    return EXIT_CODES[out.solution.status]


# --- compare --------------------------------------------------------------------


def parse_sweep(text: str) -> list[tuple[float, ...]]:
    sweep = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            sweep.append(tuple(float(v) for v in chunk.split(",")))
        except ValueError:
            raise UsageError(f"bad sweep entry {chunk!r}; expected comma-separated numbers") from None
    if not sweep:
        raise UsageError("empty sweep")
    return sweep


def geometry_set(kind: str, size: tuple[float, ...]) -> UncertaintySet:
    if kind == "box":
        return Box(size)
    if kind == "ellipse":
        if all(v == 0 for v in size):
            return Ball(0.0, (1.0,) * len(size))
        if any(v <= 0 for v in size):
            raise UsageError(f"ellipse axes must all be positive (or all zero), got {size}")
        return Ball(1.0, size)
    raise UsageError(f"unknown set kind {kind!r}")


def with_geometry(problem: UncertainLP, kind: str, size: tuple[float, ...]) -> UncertainLP:
    s = geometry_set(kind, size)

    def swap(i, pm):
        if pm.L != len(size):
            raise UsageError(f"constraint {i} has {pm.L} directions, geometry has {len(size)}")
        return s

    return problem.map_sets(swap)


def _geometry_label(kind: str, size) -> str:
    return f"{kind}:" + "x".join(f"{v:g}" for v in size)


def _csv_row(instance, geometry, method, out: Outcome | None, timing=True, error=None) -> dict:
    if out is None:
        return {
            "instance": instance,
            "geometry": geometry,
            "method": method,
            "objective": "",
            "constraints": "",
            "iterations": "",
            "seconds": "",
            "status": error or "Error",
            "x": "",
        }
    sol = out.solution
    d = sol.diagnostics or {}
    return {
        "instance": instance,
        "geometry": geometry,
        "method": method,
        "objective": _fmt(sol.objective),
        "constraints": d.get("constraints", ""),
        "iterations": d.get("iterations", ""),
        "seconds": _fmt(out.seconds) if timing else "0",
        "status": sol.status.value,
        "x": "" if sol.x is None else " ".join(_fmt(v) for v in sol.x),
        "_objective": sol.objective,
    }


def _csv_text(rows: list[dict], extra: bool = True) -> str:
    header = list(CSV_HEADER) + (["monotone", "agreement", "x"] if extra else [])
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


DEFAULT_COMPARE_METHODS = {"box": ("interval", "grid", "ellipsoid-cuts"), "ellipse": ("ellipsoid-cuts", "grid")}


def compare(problem: UncertainLP, sweep, kinds, args) -> list[dict]:
    """One row per (set kind, geometry, method), in sweep order."""
    rows: list[dict] = []
    maximize = problem.sense is Sense.MAXIMIZE
    for kind in kinds:
        methods = args.methods or DEFAULT_COMPARE_METHODS[kind]
        previous: dict[str, float | None] = {}
        for size in sweep:
            label = _geometry_label(kind, size)
            block = []
            for method in methods:
                try:
                    variant = with_geometry(problem, kind, size)
                    out = run_method(variant, method, args)
                    row = _csv_row(problem.name, label, method, out, timing=not args.no_timing)
                except (UsageError, IncompatibleSetError, IterationLimitError) as exc:
                    log.warning("%s %s: %s", label, method, exc)
                    row = _csv_row(problem.name, label, method, None, error="Error")
                value = row.get("_objective")
                prev = previous.get(method)
                if value is None or prev is None:
                    row["monotone"] = "-"
                else:
                    ok = value <= prev + 1e-9 if maximize else value >= prev - 1e-9
                    row["monotone"] = "yes" if ok else "NO"
                previous[method] = value
                block.append(row)
            values = [r["_objective"] for r in block if r.get("_objective") is not None]
            agree = "-"
            if len(values) >= 2:
                ref = values[0]
                agree = "ok" if all(abs(v - ref) <= args.tol * max(1.0, abs(ref)) for v in values) else "MISMATCH"
            for r in block:
                r["agreement"] = agree
            rows.extend(block)
    return rows


def cmd_compare(args) -> int:
    problem = parse_problem(args.problem)
    sweep = parse_sweep(args.sweep)
    kinds = [k.strip() for k in args.sets.split(",") if k.strip()]
    for k in kinds:
        if k not in DEFAULT_COMPARE_METHODS:
            raise UsageError(f"unknown set kind {k!r}; use box and/or ellipse")
    if args.methods:
        args.methods = tuple(m.strip() for m in args.methods.split(","))
        for m in args.methods:
            if m not in METHODS:
                raise UsageError(f"unknown method {m!r}")
    rows = compare(problem, sweep, kinds, args)
    if args.format == "json":
        text = json.dumps([{k: v for k, v in r.items() if not k.startswith("_")} for r in rows], indent=2) + "\n"
    elif args.format == "table":
        lines = [f"{'geometry':<14} {'method':<15} {'objective':>10} {'constraints':>11} {'status':<10} mono agree"]
        for r in rows:
            obj = "" if r.get("_objective") is None else f"{r['_objective']:.4f}"
            lines.append(
                f"{r['geometry']:<14} {r['method']:<15} {obj:>10} {str(r['constraints']):>11} "
                f"{r['status']:<10} {r['monotone']:<4} {r['agreement']}"
            )
        text = "\n".join(lines) + "\n"
    else:
        text = _csv_text(rows)
    _write(text, args.out)
    failed = any(r["status"] != SolveStatus.OPTIMAL.value for r in rows)
    return EXIT_NOT_CONVERGED if failed else EXIT_OPTIMAL


# --- plot-data ------------------------------------------------------------------


def plot_rows(clouds: list[tuple[str, UncertaintySet]], spec: GridSpec) -> list[tuple[float, float, str]]:
    rows = []
    for tag, s in clouds:
        if s.dim != 2:
            raise UsageError(f"plot data needs a 2-dimensional set, got dimension {s.dim}")
        for xi in grid_points(s, spec):
            rows.append((float(xi[0]), float(xi[1]), tag))
    return rows


def cmd_plot_data(args) -> int:
    spec = GridSpec(args.grid)
    if args.set:
        if args.size is None:
            raise UsageError("--set needs --size a,b")
        size = parse_sweep(args.size)[0]
        kinds = ["box", "ellipse"] if args.set == "both" else [args.set]
        clouds = [(k, geometry_set(k, size)) for k in kinds]
    elif args.problem:
        problem = parse_problem(args.problem)
        if not 0 <= args.constraint < problem.m:
            raise UsageError(f"constraint index {args.constraint} out of range")
        s = problem.constraints[args.constraint].perturbation.uncertainty
        clouds = [(type(s).__name__.lower(), s)]
    else:
        raise UsageError("give a problem file or --set")
    rows = plot_rows(clouds, spec)
    text = "# xi1 xi2 set\n" + "".join(f"{a:.17g} {b:.17g} {tag}\n" for a, b, tag in rows)
    _write(text, args.out)
    return EXIT_OPTIMAL


# --- validate -------------------------------------------------------------------


def cmd_validate(args) -> int:
    path = resolve_problem_path(args.problem)
    problem = parse_problem_text(path.read_text(), name=path.stem)
    issues = validate(problem)
    for v in issues:
        print(v)
    if not issues:
        print(f"{problem.name}: ok ({problem.n} variables, {problem.m} constraints)")
    return EXIT_PARSE_ERROR if issues else EXIT_OPTIMAL


# --- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robustlp", description="Robust linear optimization under box, ball and scenario uncertainty.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(p):
        p.add_argument("--decimals", type=int, default=3, help="grid refinement target (default 3)")
        p.add_argument("--grid", type=int, default=None, help="fixed grid resolution instead of refinement")
        p.add_argument("--max-resolution", type=int, default=DEFAULT_MAX_RESOLUTION)
        p.add_argument("--eps", type=float, default=DEFAULT_EPS)
        p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
        p.add_argument("--out", default=None)
        p.add_argument("--no-timing", action="store_true", help="write 0 for wall time (byte-stable output)")

    p = sub.add_parser("solve", help="solve one problem file")
    p.add_argument("problem", help=f"path or bundled name ({', '.join(bundled_problems())})")
    p.add_argument("--method", choices=METHODS, default="nominal")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="sweep set sizes and compare methods (CSV)")
    p.add_argument("problem")
    p.add_argument("--sweep", default="1,1;2,1;2,2", help="semicolon-separated sizes, e.g. '1,1;2,1'")
    p.add_argument("--sets", default="box,ellipse")
    p.add_argument("--methods", default=None, help="comma-separated methods (default depends on set)")
    p.add_argument("--tol", type=float, default=1e-3, help="cross-method agreement tolerance (relative)")
    p.add_argument("--format", choices=("table", "csv", "json"), default="csv")
    solver_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("plot-data", help="grid point clouds for plotting")
    p.add_argument("problem", nargs="?")
    p.add_argument("--constraint", type=int, default=0)
    p.add_argument("--set", choices=("box", "ellipse", "both"), default=None)
    p.add_argument("--size", default=None, help="set size a,b")
    p.add_argument("--grid", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("validate", help="check a problem file")
    p.add_argument("problem")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE_ERROR
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ProblemFileError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except (UsageError, IncompatibleSetError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE_ERROR
    except IterationLimitError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
