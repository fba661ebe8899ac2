"""Problem container, box bounds and the feasibility test.

The problem is::

    minimize    sum_n f_n(x_n)
    subject to  x_1 + ... + x_j <= rho_j     for j in L
                l_n <= x_n <= u_n

with indices 1-based in every public interface. Infinite bounds are IEEE
``-inf``/``+inf``; never a large finite sentinel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError
from .terms import ObjectiveTerm, group_terms

INF = math.inf


def ext_add(a: float, b: float) -> float:
    """Extended-real addition; ``inf + -inf`` is a defect, not a NaN."""
    if math.isinf(a) and math.isinf(b) and (a > 0) != (b > 0):
        raise ArithmeticError("undefined extended-real sum inf - inf")
    return a + b


def ext_sum(values) -> float:
    total = 0.0
    for v in values:
        total = ext_add(total, v)
    return total


@dataclass(frozen=True)
class Box:
    """Bounds ``lower < upper``; ``lower`` may be -inf, ``upper`` may be +inf."""

    lower: float = -INF
    upper: float = INF

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("box bounds must not be NaN")
        if lo == INF or hi == -INF:
            raise ValueError(f"invalid box [{lo}, {hi}]")
        if not lo < hi:
            raise ValueError(f"box needs lower < upper, got [{lo}, {hi}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances.

    root_tol
        Relative width for bisections in x (stationary points, generic
        inverse slopes). Multiplier bisection always runs to adjacent floats,
        which is tighter.
    residual_tol
        Scale for ``|c_n(s) - gamma_n|`` and for ``|f'(z)|`` at a stationary point.
    feas_tol
        Primal feasibility slack.
    cert_tol
        KKT certificate threshold.
    """

    root_tol: float = 1e-12
    residual_tol: float = 1e-9
    feas_tol: float = 1e-9
    cert_tol: float = 1e-6

    def __post_init__(self):
        for name in ("root_tol", "residual_tol", "feas_tol", "cert_tol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v!r}")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Problem:
    """Separable problem with prefix-sum budgets and box bounds.

    Parameters
    ----------
    terms : sequence of ObjectiveTerm
        One term per variable.
    boxes : sequence of Box
        Bounds, same length as ``terms``.
    budgets : mapping
        1-based constraint index ``j`` to ``rho_j``. Its keys form the active
        constraint set; they need not cover every index.
    """

    terms: tuple[ObjectiveTerm, ...]
    boxes: tuple[Box, ...]
    budgets: Mapping[int, float]

    def __post_init__(self):
        terms = tuple(self.terms)
        boxes = tuple(b if isinstance(b, Box) else Box(*b) for b in self.boxes)
        if not terms:
            raise ValueError("a problem needs at least one term")
        if len(boxes) != len(terms):
            raise ValueError(f"{len(terms)} terms but {len(boxes)} boxes")
        n = len(terms)
        budgets = {}
        for j, rho in dict(self.budgets).items():
            j = int(j)
            if not 1 <= j <= n:
                raise ValueError(f"constraint index {j} outside 1..{n}")
            rho = float(rho)
            if math.isnan(rho):
                raise ValueError(f"budget rho_{j} is NaN")
            budgets[j] = rho
        if not budgets:
            raise ValueError("the constraint set must be nonempty")
        for i, (term, box) in enumerate(zip(terms, boxes), start=1):
            if not isinstance(term, ObjectiveTerm):
                raise TypeError(f"term {i} is not an ObjectiveTerm: {term!r}")
            lo, hi = term.domain()
            if box.lower < lo or box.upper > hi:
                raise DomainError(f"box {i} [{box.lower}, {box.upper}] leaves the domain of {term!r}")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "budgets", MappingProxyType(dict(sorted(budgets.items()))))

    @classmethod
    def from_arrays(cls, terms: Sequence[ObjectiveTerm], lower=None, upper=None,
                    rho=None, constraints: Sequence[int] | None = None) -> "Problem":
        """Build from flat arrays; ``None`` bounds mean unbounded.

        ``rho`` may be a mapping, an array of length N (picked at the
        constraint indices) or an array aligned with ``constraints``.
        """
        n = len(terms)
        lower = [-INF] * n if lower is None else [(-INF if v is None else float(v)) for v in lower]
        upper = [INF] * n if upper is None else [(INF if v is None else float(v)) for v in upper]
        if len(lower) != n or len(upper) != n:
            raise ValueError("bound arrays must match the number of terms")
        if rho is None:
            raise ValueError("budgets are required")
        if isinstance(rho, Mapping):
            budgets = {int(j): v for j, v in rho.items()}
            if constraints is not None and sorted(budgets) != sorted(int(j) for j in constraints):
                raise ValueError("budget keys disagree with the constraint list")
        else:
            rho = list(rho)
            cons = list(range(1, n + 1)) if constraints is None else [int(j) for j in constraints]
            if len(set(cons)) != len(cons):
                raise ValueError("duplicate constraint indices")
            if len(rho) == len(cons):
                budgets = dict(zip(cons, rho))
            elif len(rho) == n:
                budgets = {j: rho[j - 1] for j in cons}
            else:
                raise ValueError(f"rho has length {len(rho)}; expected {len(cons)} or {n}")
            if any(v is None for v in budgets.values()):
                raise ValueError("active constraints need a budget")
        return cls(tuple(terms), tuple(Box(l, u) for l, u in zip(lower, upper)), budgets)

    @property
    def n(self) -> int:
        return len(self.terms)

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([b.lower for b in self.boxes])

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([b.upper for b in self.boxes])

    @cached_property
    def constraints(self) -> np.ndarray:
        """Active constraint indices, 1-based, increasing."""
        return np.fromiter(self.budgets.keys(), dtype=np.intp, count=len(self.budgets))

    @cached_property
    def rho(self) -> np.ndarray:
        """Budgets aligned with :attr:`constraints`."""
        return np.fromiter(self.budgets.values(), dtype=float, count=len(self.budgets))

    @cached_property
    def groups(self):
        return group_terms(self.terms)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    well_posed: bool
    violated: int | None = None      # first j with sum(l_1..l_j) > rho_j
    unbounded: int | None = None     # first n with u_n = inf and no constraint j >= n
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.feasible and self.well_posed


def validate(problem: Problem, tol: Tolerances = DEFAULT_TOL) -> FeasibilityReport:
    """Check ``sum_{n<=j} l_n <= rho_j`` for every active j, and well-posedness.

    A prefix containing -inf passes automatically. The problem is well posed
    when every decreasing term with an infinite upper bound is covered by
    some constraint ``j >= n``.
    """
    lower = problem.lower
    prefix = np.cumsum(lower)   # -inf propagates; lower never holds +inf
    violated = None
    for j, rho in problem.budgets.items():
        if prefix[j - 1] > rho:
            violated = j
            break
    last = int(problem.constraints[-1])
    unbounded = None
    for n in range(last + 1, problem.n + 1):
        if problem.upper[n - 1] == INF:
            from .preprocess import CaseKind, classify_term
            if classify_term(problem.terms[n - 1], problem.boxes[n - 1], tol).kind is CaseKind.DECREASING:
                unbounded = n
                break
    msgs = []
    if violated is not None:
        msgs.append(f"infeasible: constraint j={violated}: sum of lower bounds "
                    f"{prefix[violated - 1]:.4g} > rho={problem.budgets[violated]:.4g}")
    if unbounded is not None:
        msgs.append(f"ill-posed: x_{unbounded} has no upper bound and no constraint j >= {unbounded}")
    return FeasibilityReport(violated is None, unbounded is None, violated, unbounded,
                             "; ".join(msgs) or "feasible")
