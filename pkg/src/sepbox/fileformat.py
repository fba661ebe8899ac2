"""JSON problem and solution documents.

Problem document::

    {
      "terms": [{"family": "exp", "w": 2.0}, ...],
      "lower": [null, ...],          # null = -inf; optional, default all null
      "upper": [0.4, ...],           # null = +inf; optional, default all null
      "rho": [0.2, ...],             # list (length N or len(constraints)) or {"j": value}
      "constraints": [1, 2, 3, 4]    # optional 1-based indices; default 1..N
    }

Solution document: ``status`` plus, when optimal, ``x``, ``sigma``,
``objective`` and ``stages``. Floats are written with Python's shortest
round-trip representation, so files reload bit-exactly.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .engine import Solution
from .problem import Problem
from .terms import FAMILIES

_PROBLEM_KEYS = {"terms", "lower", "upper", "rho", "constraints"}
_PARAMS = {"exp": ("w",), "neglog": ("a",), "quadratic": ("t",), "reciprocal": ("w", "a")}


class FormatError(ValueError):
    """Malformed problem or solution document."""


def _number(v: Any, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FormatError(f"{what} must be a number, got {v!r}")
    return float(v)


def _bound(v: Any, what: str, inf: float) -> float:
    return inf if v is None else _number(v, what)


def problem_from_dict(doc: Any) -> Problem:
    if not isinstance(doc, dict):
        raise FormatError("problem document must be an object")
    unknown = set(doc) - _PROBLEM_KEYS
    if unknown:
        raise FormatError(f"unknown keys: {sorted(unknown)}")
    if "terms" not in doc or "rho" not in doc:
        raise FormatError("problem document needs 'terms' and 'rho'")
    raw_terms = doc["terms"]
    if not isinstance(raw_terms, list) or not raw_terms:
        raise FormatError("'terms' must be a nonempty array")
    terms = []
    for i, entry in enumerate(raw_terms, start=1):
        if not isinstance(entry, dict) or "family" not in entry:
            raise FormatError(f"term {i} needs a 'family'")
        fam = entry["family"]
        if fam not in FAMILIES:
            raise FormatError(f"term {i}: unknown family {fam!r}")
        names = _PARAMS[fam]
        extra = set(entry) - {"family", *names}
        if extra:
            raise FormatError(f"term {i}: unknown parameters {sorted(extra)}")
        missing = [k for k in names if k not in entry]
        if missing:
            raise FormatError(f"term {i}: missing parameters {missing}")
        try:
            terms.append(FAMILIES[fam](**{k: _number(entry[k], f"term {i} {k}") for k in names}))
        except FormatError:
            raise
        except ValueError as exc:
            raise FormatError(f"term {i}: {exc}") from exc
    n = len(terms)

    def bounds(key, inf):
        arr = doc.get(key)
        if arr is None:
            return [inf] * n
        if not isinstance(arr, list) or len(arr) != n:
            raise FormatError(f"'{key}' must be an array of length {n}")
        return [_bound(v, f"{key}[{i}]", inf) for i, v in enumerate(arr, start=1)]

    lower = bounds("lower", -math.inf)
    upper = bounds("upper", math.inf)
    cons = doc.get("constraints")
    if cons is not None:
        if not isinstance(cons, list) or not all(isinstance(j, int) and not isinstance(j, bool) for j in cons):
            raise FormatError("'constraints' must be an array of integers")
    rho = doc["rho"]
    if isinstance(rho, dict):
        try:
            rho = {int(k): _number(v, f"rho[{k}]") for k, v in rho.items()}
        except (TypeError, ValueError) as exc:
            raise FormatError(f"bad 'rho' map: {exc}") from exc
    elif isinstance(rho, list):
        rho = [None if v is None else _number(v, "rho entry") for v in rho]
    else:
        raise FormatError("'rho' must be an array or an object")
    try:
        return Problem.from_arrays(terms, lower, upper, rho, cons)
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def parse_problem(text: str) -> Problem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    return problem_from_dict(doc)


def problem_to_dict(problem: Problem) -> dict:
    return {
        "terms": [{"family": t.family, **t.params()} for t in problem.terms],
        "lower": [None if math.isinf(b.lower) else b.lower for b in problem.boxes],
        "upper": [None if math.isinf(b.upper) else b.upper for b in problem.boxes],
        "rho": list(problem.budgets.values()),
        "constraints": list(problem.budgets.keys()),
    }


def dump_problem(problem: Problem) -> str:
    return json.dumps(problem_to_dict(problem), indent=1)


def _floats(a) -> list:
    return [None if not math.isfinite(v) else float(v) for v in np.asarray(a, dtype=float)]


def solution_to_dict(solution: Solution, trace: bool = False) -> dict:
    stages = []
    for st in solution.stages:
        entry: dict[str, Any] = {"start": st.start, "mu_star": st.mu_star, "k_star": st.k_star,
                                 "solved": st.solved}
        if trace and st.indices is not None:
            entry["gammas"] = {str(j): g for j, g in st.gamma_map().items()}
            entry["candidates"] = {str(j): c for j, c in st.candidate_map().items()}
        stages.append(entry)
    return {
        "status": "optimal",
        "mode": solution.mode,
        "x": _floats(solution.x),
        "sigma": _floats(solution.sigma),
        "objective": solution.objective,
        "stages": stages,
    }


def status_document(status: str, message: str, index: int | None = None) -> dict:
    doc: dict[str, Any] = {"status": status, "message": message}
    if index is not None:
        doc["index"] = index
    return doc


def dump_solution(doc: dict) -> str:
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def parse_solution(text: str) -> dict:
    """Load a solution document; optimal ones get ``x`` and ``sigma`` as arrays."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("status") not in ("optimal", "infeasible", "ill_posed", "numerical_failure"):
        raise FormatError("solution document needs a known 'status'")
    if doc["status"] == "optimal":
        for key in ("x", "sigma", "objective"):
            if key not in doc:
                raise FormatError(f"optimal solution lacks '{key}'")
        try:
            doc["x"] = np.array([_number(v, "x entry") for v in doc["x"]])
            doc["sigma"] = np.array([_number(v, "sigma entry") for v in doc["sigma"]])
        except TypeError as exc:
            raise FormatError(str(exc)) from exc
    return doc
