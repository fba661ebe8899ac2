"""Command-line front end: ``sepbox validate | solve | check | curves``.

Exit codes: 0 ok, 1 parse/usage error, 2 infeasible, 3 ill-posed,
4 numerical failure, 5 certificate failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import engine
from .errors import BracketFailure, IllPosedError, InfeasibleError, SolverError
from .fileformat import (FormatError, dump_solution, parse_problem, parse_solution,
                         solution_to_dict, status_document)
from .oracle import kkt_certificate
from .preprocess import preprocess
from .problem import DEFAULT_TOL, Tolerances, validate

EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_ILL_POSED, EXIT_NUMERICAL, EXIT_CERT = range(6)


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        self.code = code
        self.message = message


def _read(path: str) -> str:
    try:
        return Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as exc:
        raise _Exit(EXIT_PARSE, f"cannot read {path}: {exc}")


def _load_problem(path: str):
    try:
        return parse_problem(_read(path))
    except FormatError as exc:
        raise _Exit(EXIT_PARSE, f"{path}: {exc}")


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _g4(v: float) -> str:
    return f"{v:.4g}"


def cmd_validate(args) -> int:
    problem = _load_problem(args.problem)
    rep = validate(problem)
    if not rep.feasible:
        raise _Exit(EXIT_INFEASIBLE, rep.message)
    if not rep.well_posed:
        raise _Exit(EXIT_ILL_POSED, rep.message)
    try:
        preprocess(problem)
    except IllPosedError as exc:
        raise _Exit(EXIT_ILL_POSED, str(exc))
    print(f"feasible: N={problem.n}, {len(problem.budgets)} constraints")
    return EXIT_OK


def _tolerances(args) -> Tolerances:
    kw = {}
    for flag, name in (("tol_root", "root_tol"), ("tol_feas", "feas_tol"), ("tol_cert", "cert_tol")):
        v = getattr(args, flag, None)
        if v is not None:
            kw[name] = v
    try:
        return Tolerances(**{**DEFAULT_TOL.__dict__, **kw})
    except ValueError as exc:
        raise _Exit(EXIT_PARSE, str(exc))


def cmd_solve(args) -> int:
    problem = _load_problem(args.problem)
    tol = _tolerances(args)
    mode = "batch" if args.batch else ("lazy" if args.lazy else "eager")
    try:
        sol = engine.solve(problem, tol, mode=mode, trace=args.trace)
    except InfeasibleError as exc:
        _write(dump_solution(status_document("infeasible", str(exc), exc.index)), args.out)
        raise _Exit(EXIT_INFEASIBLE, str(exc))
    except IllPosedError as exc:
        _write(dump_solution(status_document("ill_posed", str(exc), exc.index)), args.out)
        raise _Exit(EXIT_ILL_POSED, str(exc))
    except (BracketFailure, SolverError, ArithmeticError) as exc:
        _write(dump_solution(status_document("numerical_failure", str(exc))), args.out)
        raise _Exit(EXIT_NUMERICAL, f"numerical failure: {exc}")
    _write(dump_solution(solution_to_dict(sol, trace=args.trace)), args.out)
    print(f"optimal: objective={_g4(sol.objective)}, stages={len(sol.stages)}, mode={mode}",
          file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    problem = _load_problem(args.problem)
    try:
        doc = parse_solution(_read(args.solution))
    except FormatError as exc:
        raise _Exit(EXIT_PARSE, f"{args.solution}: {exc}")
    if doc["status"] != "optimal":
        raise _Exit(EXIT_PARSE, f"{args.solution}: status is {doc['status']!r}, nothing to certify")
    tol = _tolerances(args)
    try:
        rep = kkt_certificate(problem, doc["x"], doc["sigma"], tol)
    except ValueError as exc:
        raise _Exit(EXIT_PARSE, str(exc))
    for name, value in rep.residuals.items():
        where = rep.worst.get(name)
        tail = f" (index {where})" if where is not None and value > 0 else ""
        print(f"{name:13s} {_g4(value)}{tail}")
    if not rep.passed:
        bad = [k for k, v in rep.residuals.items() if v > rep.tol]
        raise _Exit(EXIT_CERT, f"certificate failed: {', '.join(bad)} above {_g4(rep.tol)}")
    print(f"certificate passed at tol={_g4(rep.tol)}")
    return EXIT_OK


def _cell(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def curve_rows(problem, lo: float, hi: float, samples: int, start: int = 0, tol: Tolerances = DEFAULT_TOL):
    """Header and rows of ``sigma, xi_1..xi_N, c_1..c_N`` sampled on ``[lo, hi]``.

    Fixed (increasing) variables report their lower bound, and ``c_n`` sums
    every response from ``start + 1`` to ``n``, so its crossings with the
    original budgets mark the stage candidates. Columns ``c_n`` with
    ``n <= start`` are left empty.
    """
    ctx = engine.prepare(problem, tol)
    n = problem.n
    header = ["sigma"] + [f"xi_{i}" for i in range(1, n + 1)] + [f"c_{i}" for i in range(1, n + 1)]
    rows = []
    for s in np.linspace(lo, hi, samples):
        s = float(s)
        resp = ctx.suffix(0).xi(s)
        resp[ctx.fixed] = ctx.lower[ctx.fixed]
        with np.errstate(invalid="ignore"):
            c = np.cumsum(resp[start:])
        rows.append([_cell(s)] + [_cell(v) for v in resp] + [""] * start + [_cell(v) for v in c])
    return header, rows


def cmd_curves(args) -> int:
    problem = _load_problem(args.problem)
    try:
        lo_s, hi_s = args.range.split(":")
        lo, hi = float(lo_s), float(hi_s)
    except ValueError:
        raise _Exit(EXIT_PARSE, f"bad --range {args.range!r}; expected a:b")
    if not (0 <= lo <= hi and math.isfinite(hi)):
        raise _Exit(EXIT_PARSE, f"bad --range {args.range!r}; need 0 <= a <= b")
    if args.samples < 1:
        raise _Exit(EXIT_PARSE, "--samples must be positive")
    if not 0 <= args.stage < problem.n:
        raise _Exit(EXIT_PARSE, f"--stage must lie in 0..{problem.n - 1}")
    try:
        header, rows = curve_rows(problem, lo, hi, args.samples, args.stage)
    except InfeasibleError as exc:
        raise _Exit(EXIT_INFEASIBLE, str(exc))
    except IllPosedError as exc:
        raise _Exit(EXIT_ILL_POSED, str(exc))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sepbox", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check feasibility and well-posedness")
    v.add_argument("problem")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="solve and write a solution document")
    s.add_argument("problem")
    how = s.add_mutually_exclusive_group()
    how.add_argument("--lazy", action="store_true", help="skip stage equations that cannot win")
    how.add_argument("--batch", action="store_true", help="one bisection per stage (large N)")
    s.add_argument("--trace", action="store_true", help="include per-stage budgets and candidates")
    s.add_argument("--tol-root", type=float)
    s.add_argument("--tol-feas", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="KKT-certify a solution document")
    c.add_argument("problem")
    c.add_argument("solution")
    c.add_argument("--tol-cert", type=float)
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("curves", help="CSV of xi_n and c_n against the multiplier level")
    k.add_argument("problem")
    k.add_argument("--range", required=True, help="a:b with 0 <= a <= b")
    k.add_argument("--samples", type=int, default=201)
    k.add_argument("--stage", type=int, default=0, help="stage start j; c_n sums from j+1")
    k.add_argument("--out")
    k.set_defaults(func=cmd_curves)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except _Exit as exc:
        if exc.message:
            print(exc.message, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
