"""Independent checks of a solution.

The KKT conditions are sufficient for optimality in a convex program, so a
passing certificate proves a point optimal without a second solver. The grid
search is a brute-force cross-check for tiny instances.

Everything here evaluates terms one scalar at a time through the public term
methods, never through the vectorized paths the engine uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError
from .problem import DEFAULT_TOL, Problem, Tolerances


class EmptyFeasibleSet(SolverError):
    """No grid point satisfies the constraints."""


def objective_value(problem: Problem, x) -> float:
    """Sum of term values at ``x``."""
    if len(x) != problem.n:
        raise ValueError(f"x has length {len(x)}, expected {problem.n}")
    return math.fsum(t.value(float(v)) for t, v in zip(problem.terms, x))


@dataclass(frozen=True)
class CertificateReport:
    """Reconstructed multipliers and scaled KKT residuals.

    ``lam`` maps each active constraint index to ``sigma_j - sigma_next``.
    Residuals are maxima over variables/constraints; ``worst`` names the
    1-based index behind each one.
    """

    lam: dict[int, float]
    feasibility: float
    sign: float
    slackness: float
    stationarity: float
    tol: float
    worst: dict[str, int | None] = field(default_factory=dict)

    @property
    def residuals(self) -> dict[str, float]:
        return {"feasibility": self.feasibility, "sign": self.sign,
                "slackness": self.slackness, "stationarity": self.stationarity}

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())


def _argmax(values: list[float]) -> tuple[float, int | None]:
    if not values:
        return 0.0, None
    i = max(range(len(values)), key=lambda k: (values[k], -k))
    return values[i], i


def kkt_certificate(problem: Problem, x, sigma, tol: Tolerances = DEFAULT_TOL) -> CertificateReport:
    """Check feasibility, multiplier signs, complementary slackness and stationarity.

    ``sigma[n]`` is read as the cumulative multiplier on ``x[n]``; only its
    values at active constraint indices matter, since the per-constraint
    multipliers are rebuilt from their differences.
    """
    x = np.asarray(x, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    n = problem.n
    if x.shape != (n,) or sigma.shape != (n,):
        raise ValueError(f"expected x and sigma of length {n}, got {x.shape} and {sigma.shape}")

    cons = [int(j) for j in problem.constraints]
    lam = {}
    for a, j in enumerate(cons):
        nxt = sigma[cons[a + 1] - 1] if a + 1 < len(cons) else 0.0
        lam[j] = float(sigma[j - 1] - nxt)
    # cumulative multiplier implied by lam
    sig_hat = np.zeros(n)
    acc = 0.0
    pos = len(cons) - 1
    for i in range(n - 1, -1, -1):
        while pos >= 0 and cons[pos] - 1 >= i:
            acc += lam[cons[pos]]
            pos -= 1
        sig_hat[i] = acc

    prefix = np.cumsum(x)
    feas = []
    for j in cons:
        rho = problem.budgets[j]
        feas.append(max(0.0, prefix[j - 1] - rho) / max(1.0, abs(rho)))
    for b, v in zip(problem.boxes, x):
        if not math.isfinite(v):
            feas.append(math.inf)
            continue
        r = 0.0
        if v < b.lower:
            r = (b.lower - v) / max(1.0, abs(b.lower))
        if v > b.upper:
            r = (v - b.upper) / max(1.0, abs(b.upper))
        feas.append(r)
    feas_r, feas_i = _argmax(feas)
    if feas_i is not None:
        feas_i = cons[feas_i] if feas_i < len(cons) else feas_i - len(cons) + 1

    sign_vals = [max(0.0, -lam[j]) for j in cons]
    sign_r, sign_i = _argmax(sign_vals)

    slack = []
    for j in cons:
        rho = problem.budgets[j]
        gap = prefix[j - 1] - rho
        slack.append(abs(lam[j] * gap) / (max(1.0, abs(rho)) * max(1.0, abs(lam[j]))))
    slack_r, slack_i = _argmax(slack)

    stat = []
    bound_tol = tol.feas_tol
    for term, b, v, s in zip(problem.terms, problem.boxes, x, sig_hat):
        if not math.isfinite(v):
            stat.append(math.inf)
            continue
        try:
            g = term.slope(float(v)) + s
        except SolverError:
            stat.append(math.inf)
            continue
        scale = max(1.0, abs(s))
        at_lo = math.isfinite(b.lower) and abs(v - b.lower) <= bound_tol * max(1.0, abs(b.lower))
        at_hi = math.isfinite(b.upper) and abs(v - b.upper) <= bound_tol * max(1.0, abs(b.upper))
        if math.isnan(g):
            r = math.inf
        elif at_lo and at_hi:
            r = 0.0
        elif at_lo:
            r = max(0.0, -g) / scale
        elif at_hi:
            r = max(0.0, g) / scale
        else:
            r = abs(g) / scale
        stat.append(r)
    stat_r, stat_i = _argmax(stat)

    return CertificateReport(
        lam, feas_r, sign_r, slack_r, stat_r, tol.cert_tol,
        {"feasibility": feas_i,
         "sign": cons[sign_i] if sign_i is not None else None,
         "slackness": cons[slack_i] if slack_i is not None else None,
         "stationarity": None if stat_i is None else stat_i + 1},
    )


def certify(problem: Problem, solution, tol: Tolerances = DEFAULT_TOL) -> CertificateReport:
    """:func:`kkt_certificate` for a solver :class:`~sepbox.engine.Solution`."""
    return kkt_certificate(problem, solution.x, solution.sigma, tol)


def granularity_bound(problem: Problem, resolution: int) -> float:
    """Worst objective loss from rounding an optimum down onto the grid.

    ``max |f'|`` over the boxes (attained at an endpoint for convex terms)
    times the total grid spacing.
    """
    lmax = 0.0
    width = 0.0
    for term, b in zip(problem.terms, problem.boxes):
        lmax = max(lmax, abs(term.slope(b.lower)), abs(term.slope(b.upper)))
        width += b.upper - b.lower
    return lmax * width / resolution


def grid_reference(problem: Problem, resolution: int, chunk: int = 1 << 20,
                   max_points: float = 5e8) -> tuple[np.ndarray, float]:
    """Best feasible point on a uniform grid over the boxes.

    Every combination of ``resolution + 1`` points per coordinate is scored.
    Ties go to the lexicographically first grid point.

    Raises
    ------
    EmptyFeasibleSet
        When no grid point meets every active constraint.
    """
    n = problem.n
    if n > 4:
        raise ValueError("grid_reference is meant for N <= 4")
    if not (np.all(np.isfinite(problem.lower)) and np.all(np.isfinite(problem.upper))):
        raise ValueError("grid_reference needs finite boxes")
    if resolution < 1:
        raise ValueError("resolution must be positive")
    if float(resolution + 1) ** n > max_points:
        raise ValueError(f"{resolution + 1}^{n} grid points exceed max_points={max_points:g}")
    grids = [np.linspace(b.lower, b.upper, resolution + 1) for b in problem.boxes]
    vals = [np.array([t.value(float(v)) for v in g]) for t, g in zip(problem.terms, grids)]
    m = resolution + 1

    # coordinates 2..N as flattened broadcast arrays
    shape = (m,) * (n - 1)
    rest_obj = np.zeros(shape)
    rest_prefix = [np.zeros(shape)]          # sum of x_2..x_j for j = 1..N
    for d in range(1, n):
        view = [1] * (n - 1)
        view[d - 1] = m
        rest_obj = rest_obj + vals[d].reshape(view)
        rest_prefix.append(rest_prefix[-1] + grids[d].reshape(view))
    rest_obj = rest_obj.ravel()
    rest_prefix = [p.ravel() if p.ndim else np.zeros(1) for p in rest_prefix]
    if n == 1:
        rest_obj = np.zeros(1)
        rest_prefix = [np.zeros(1)]
    width = rest_obj.size

    best, best_at = math.inf, None
    step = max(1, chunk // width)
    for i0 in range(0, m, step):
        x0 = grids[0][i0:i0 + step][:, None]
        obj = vals[0][i0:i0 + step][:, None] + rest_obj[None, :]
        ok = np.ones(obj.shape, dtype=bool)
        for j, rho in problem.budgets.items():
            ok &= (x0 + rest_prefix[j - 1][None, :]) <= rho
        obj = np.where(ok, obj, math.inf)
        flat = int(np.argmin(obj))
        if obj.flat[flat] < best:
            best = float(obj.flat[flat])
            best_at = (i0 + flat // width, flat % width)
    if best_at is None:
        raise EmptyFeasibleSet("no feasible grid point")
    i0, rest = best_at
    idx = [i0] + (list(np.unravel_index(rest, shape)) if n > 1 else [])
    x = np.array([grids[d][k] for d, k in enumerate(idx)])
    return x, objective_value(problem, x)
