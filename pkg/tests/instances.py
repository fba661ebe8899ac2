"""Random problem generators shared by the test modules."""

from __future__ import annotations

import math

import numpy as np

from sepbox import Exponential, NegLog, Problem, Quadratic, Reciprocal, validate

FAMILY_NAMES = ("exp", "neglog", "quadratic", "reciprocal")


def worked_example() -> Problem:
    return Problem.from_arrays(
        [Exponential(2.0), Exponential(5.0), Exponential(8.0), Exponential(0.5)],
        upper=[0.4, -1.2, 2.0, -1.8],
        rho=[0.2, -2.0, 1.1, -1.9],
    )


def _term_and_box(rng, family, finite, case=None):
    """One term with a box; ``case`` forces increasing/interior/decreasing for quadratics."""
    inf_lo = not finite and rng.random() < 0.3
    inf_hi = not finite and rng.random() < 0.3
    if family == "exp":
        term = Exponential(float(rng.uniform(0.2, 5.0)))
        lo = -math.inf if inf_lo else float(rng.uniform(-3.0, 1.0))
    elif family == "neglog":
        a = float(rng.uniform(0.5, 3.0))
        term = NegLog(a)
        lo = float(-a + rng.uniform(0.1, 2.0))
    elif family == "reciprocal":
        a = float(rng.uniform(0.5, 3.0))
        term = Reciprocal(float(rng.uniform(0.2, 5.0)), a)
        lo = float(-a + rng.uniform(0.1, 2.0))
    else:
        lo = -math.inf if inf_lo else float(rng.uniform(-3.0, 1.0))
        term = None
    width = float(rng.uniform(0.3, 4.0))
    hi = math.inf if inf_hi else (lo + width if math.isfinite(lo) else float(rng.uniform(-2.0, 2.0)))
    if family == "quadratic":
        case = case if case is not None else rng.integers(3)
        flo = lo if math.isfinite(lo) else (hi - 5.0 if math.isfinite(hi) else -2.0)
        fhi = hi if math.isfinite(hi) else flo + 5.0
        if case == 0 and math.isfinite(lo):
            t = lo - float(rng.uniform(0.0, 2.0))
        elif case == 2 and math.isfinite(hi):
            t = hi + float(rng.uniform(0.0, 2.0))
        else:
            t = float(rng.uniform(flo, fhi))
        term = Quadratic(t)
    return term, lo, hi


def random_problem(rng, n_max=12, finite=False, families=FAMILY_NAMES, subset_prob=0.3,
                   n=None, quad_case=None) -> Problem:
    """A feasible, well-posed instance.

    Budgets come from a random point inside the boxes plus nonnegative slack,
    so feasibility holds by construction. About ``subset_prob`` of the
    instances drop constraints from the full set.
    """
    while True:
        n = n if n is not None else int(rng.integers(1, n_max + 1))
        terms, lower, upper = [], [], []
        for _ in range(n):
            t, lo, hi = _term_and_box(rng, families[rng.integers(len(families))], finite, quad_case)
            terms.append(t)
            lower.append(lo)
            upper.append(hi)
        cons = list(range(1, n + 1))
        if n > 1 and rng.random() < subset_prob:
            k = int(rng.integers(1, n))
            cons = sorted(rng.choice(np.arange(1, n + 1), size=k, replace=False).tolist())
        point = []
        for lo, hi in zip(lower, upper):
            a = lo if math.isfinite(lo) else (hi - 3.0 if math.isfinite(hi) else -2.0)
            b = hi if math.isfinite(hi) else a + 3.0
            point.append(float(rng.uniform(a, b)))
        prefix = np.cumsum(point)
        slack = np.where(rng.random(n) < 0.3, 0.0, rng.exponential(0.7, n))
        rho = {j: float(prefix[j - 1] + slack[j - 1]) for j in cons}
        problem = Problem.from_arrays(terms, lower, upper, rho)
        if validate(problem).ok:
            return problem
