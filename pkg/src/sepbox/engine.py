"""Stagewise multiplier computation.

After preprocessing every surviving term is strictly decreasing, so its
response to a multiplier level ``s >= 0`` is

    xi_n(s) = clip(h_n^{-1}(s), l_n, u'_n),      h_n = -f_n'

which is nonincreasing in ``s``. A stage starting after index ``j`` solves,
for every active constraint ``n > j``,

    c_n(s) = xi_{j+1}(s) + ... + xi_n(s) = gamma_n

for its candidate level. The largest candidate ``mu`` and the largest index
``k`` attaining it close the block ``j+1..k``: all of its variables get the
multiplier ``mu``. Later budgets drop by ``gamma_k`` and the next stage starts
after ``k``.

Candidate levels are computed as the *smallest float* ``s`` with
``c_n(s) <= gamma_n``. With that convention "candidate n is at least s" is
exactly "``c_n(prev(s)) > gamma_n``", so the eager, lazy and batch stage
strategies return bit-identical ``(mu, k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BracketFailure, DomainError, IllPosedError, InfeasibleError
from .preprocess import PreprocessReport, preprocess
from .problem import DEFAULT_TOL, Problem, Tolerances, validate
from .roots import bisect_sign, bracket_from_one, prev_float, smallest_true
from .terms import ObjectiveTerm

INF = math.inf

_MODES = ("eager", "lazy", "batch")


def _inverse_clamped(term: ObjectiveTerm, lower: float, upper: float, s: float, tol: Tolerances) -> float:
    """h^{-1}(s) projected on [lower, upper] for a term without bulk hooks."""
    try:
        raw = term.inverse_neg_slope(s) if s > 0 else INF
    except NotImplementedError:
        return _inverse_by_bisection(term, lower, upper, s, tol)
    return min(max(raw, lower), upper)


def _inverse_by_bisection(term, lower, upper, s, tol):
    h = term.neg_slope
    if math.isfinite(upper):
        if h(upper) > s:
            return upper
        hi = upper
    else:
        anchor = (lower if math.isfinite(lower) else 0.0) + 1.0
        step, hi = 1.0, anchor
        while h(hi) > s:
            step *= 2.0
            hi = anchor + step
            if hi > 1e300:
                return INF
    if math.isfinite(lower):
        if h(lower) <= s:
            return lower
        lo = lower
    else:
        step, lo = 1.0, hi - 1.0
        while h(lo) <= s:
            step *= 2.0
            lo = hi - step
            if lo < -1e300:
                return -INF
    return bisect_sign(lambda x: s - h(x), lo, hi, tol.root_tol)


def xi(term: ObjectiveTerm, lower: float, upper: float, varsigma: float,
       tol: Tolerances = DEFAULT_TOL) -> float:
    """Clamped response of a decreasing term to the multiplier level ``varsigma``.

    Returns ``upper`` when ``varsigma < h(upper)``, ``lower`` when
    ``varsigma >= h(lower)`` and ``h^{-1}(varsigma)`` in between.

    Raises
    ------
    DomainError
        If ``upper`` is infinite and the response would be +inf.
    """
    if varsigma < 0 or math.isnan(varsigma):
        raise DomainError(f"multiplier level must be >= 0, got {varsigma!r}")
    x = _inverse_clamped(term, lower, upper, varsigma, tol)
    if x == INF:
        raise DomainError(f"xi({varsigma!r}) is +inf: upper bound infinite and level too small")
    return x


class StageContext:
    """A preprocessed problem ready for stage equations.

    Fixed (increasing) variables contribute nothing to ``c_n``; budgets are
    the adjusted ones.
    """

    def __init__(self, problem: Problem, tol: Tolerances = DEFAULT_TOL,
                 report: PreprocessReport | None = None):
        self.problem = problem
        self.tol = tol
        self.report = report if report is not None else preprocess(problem, tol)
        self.lower = problem.lower
        self.upper = self.report.upper_prime
        self.fixed = self.report.fixed_mask
        groups, generic = problem.groups
        keep = ~self.fixed
        self.groups = [g.take(keep[g.index]) for g in groups]
        self.generic = np.array([i for i in generic if keep[i]], dtype=np.intp)
        self.cons = problem.constraints - 1     # 0-based variable positions
        self.rho = self.report.rho_prime

    def suffix(self, start: int) -> "_Suffix":
        return _Suffix(self, start)

    def xi_all(self, s: float) -> np.ndarray:
        """Responses of all variables; fixed ones report 0 (they are not in any c_n)."""
        return self.suffix(0).xi(s)


class _Suffix:
    """Responses of variables ``start..N-1`` (0-based) to a scalar level."""

    def __init__(self, ctx: StageContext, start: int):
        self.ctx = ctx
        self.start = start
        self.m = ctx.problem.n - start
        self.parts = []
        for g in ctx.groups:
            k = int(np.searchsorted(g.index, start))
            idx = g.index[k:]
            if idx.size == 0:
                continue
            loc = idx - start
            target = slice(None) if idx.size == self.m else loc
            P = {key: v[k:] for key, v in g.params.items()}
            self.parts.append((g.cls, target, P, ctx.lower[idx], ctx.upper[idx]))
        gen = ctx.generic[ctx.generic >= start]
        self.generic = [(int(i) - start, ctx.problem.terms[i], float(ctx.lower[i]), float(ctx.upper[i]))
                        for i in gen]

    def xi(self, s: float) -> np.ndarray:
        out = np.zeros(self.m)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            for cls, target, P, lo, hi in self.parts:
                out[target] = np.minimum(np.maximum(cls._binverse(P, s), lo), hi)
        for loc, term, lo, hi in self.generic:
            out[loc] = _inverse_clamped(term, lo, hi, s, self.ctx.tol)
        return out


@dataclass(frozen=True)
class StageResult:
    """One pass of the stage loop.

    ``start`` is the last index of the previous block (0 for the first
    stage); ``k_star`` closes this block. Indices are 1-based. ``indices``,
    ``gammas`` and ``candidates`` are only kept when tracing; a NaN candidate
    was skipped (lazy) or never formed (batch).
    """

    start: int
    mu_star: float
    k_star: int
    solved: int
    indices: np.ndarray | None = None
    gammas: np.ndarray | None = None
    candidates: np.ndarray | None = None

    def gamma_map(self) -> dict[int, float]:
        if self.indices is None:
            return {}
        return {int(j): float(g) for j, g in zip(self.indices, self.gammas)}

    def candidate_map(self) -> dict[int, float | None]:
        if self.indices is None:
            return {}
        return {int(j): (None if math.isnan(c) else float(c)) for j, c in zip(self.indices, self.candidates)}


@dataclass(frozen=True)
class Solution:
    x: np.ndarray
    sigma: np.ndarray
    objective: float
    stages: tuple[StageResult, ...]
    report: PreprocessReport
    mode: str = "eager"


class _Stage:
    """Stage equations for active constraints ``local`` (0-based, relative to the suffix)."""

    def __init__(self, suffix: _Suffix, local: np.ndarray, gammas: np.ndarray, cache: bool):
        self.suffix = suffix
        self.local = local
        self.gammas = gammas
        self._cache: dict[float, np.ndarray] | None = {} if cache else None

    def c(self, s: float) -> np.ndarray:
        """``c_n(s)`` for every active n."""
        if self._cache is not None and s in self._cache:
            return self._cache[s]
        vals = np.cumsum(self.suffix.xi(s))[self.local]
        if self._cache is not None:
            self._cache[s] = vals
        return vals

    def violated(self, s: float) -> np.ndarray:
        """Mask of n whose candidate exceeds ``prev(s)``, i.e. is at least ``s``."""
        if s <= 0:
            return np.ones(len(self.local), dtype=bool)
        return self.c(prev_float(s)) > self.gammas

    def candidate(self, i: int) -> float:
        g = self.gammas[i]
        if self.c(0.0)[i] <= g:
            return 0.0
        return _smallest_level(lambda s: self.c(s)[i] <= g)

    def joint(self) -> float:
        if np.all(self.c(0.0) <= self.gammas):
            return 0.0
        return _smallest_level(lambda s: bool(np.all(self.c(s) <= self.gammas)))


def _smallest_level(pred: Callable[[float], bool]) -> float:
    lo, hi = bracket_from_one(pred)
    return smallest_true(pred, lo, hi)


def _run(stage: _Stage, mode: str) -> tuple[float, int, int, np.ndarray]:
    K = len(stage.local)
    cands = np.full(K, np.nan)
    if mode == "batch":
        mu = stage.joint()
        if mu == 0.0:
            k = K - 1
        else:
            k = int(np.flatnonzero(stage.violated(mu))[-1])
        return mu, k, K, cands
    if mode == "eager":
        for i in range(K):
            cands[i] = stage.candidate(i)
        solved = K
    else:
        cands[0] = best = stage.candidate(0)
        solved, pos = 1, 1
        while pos < K:
            if best == 0.0:
                # every later candidate ties or beats 0; nothing can be skipped
                i = pos
            else:
                hit = np.flatnonzero(stage.violated(best)[pos:])
                if hit.size == 0:
                    break
                i = pos + int(hit[0])
            cands[i] = stage.candidate(i)
            best = max(best, cands[i])
            solved += 1
            pos = i + 1
    mu = float(np.nanmax(cands))
    k = int(np.flatnonzero(cands == mu)[-1])
    return mu, k, solved, cands


def prepare(problem: Problem, tol: Tolerances = DEFAULT_TOL) -> StageContext:
    """Validate and preprocess; raises on infeasible or ill-posed input."""
    rep = validate(problem, tol)
    if not rep.feasible:
        raise InfeasibleError(rep.violated, rep.message)
    if not rep.well_posed:
        raise IllPosedError(rep.unbounded, rep.message)
    return StageContext(problem, tol)


def cumulative_c(ctx: StageContext, start: int, n: int, varsigma: float) -> float:
    """``c_n(s) = xi_{start+1}(s) + ... + xi_n(s)`` with 1-based ``n > start``."""
    if not 0 <= start < n <= ctx.problem.n:
        raise ValueError(f"need 0 <= start < n <= N, got start={start}, n={n}")
    return float(np.cumsum(ctx.suffix(start).xi(varsigma))[n - start - 1])


def solve_stage_equation(ctx: StageContext, start: int, n: int, gamma: float) -> float:
    """Smallest level ``s >= 0`` with ``c_n(s) <= gamma``; 0 when the uppers already fit.

    Raises
    ------
    BracketFailure
        If no level up to 1e308 satisfies the equation.
    """
    if not 0 <= start < n <= ctx.problem.n:
        raise ValueError(f"need 0 <= start < n <= N, got start={start}, n={n}")
    stage = _Stage(ctx.suffix(start), np.array([n - start - 1]), np.array([float(gamma)]), cache=False)
    return stage.candidate(0)


def run_stage(ctx: StageContext, start: int, gammas: dict[int, float], lazy: bool = False,
              mode: str | None = None) -> StageResult:
    """One stage for the given active constraints (1-based index to residual budget)."""
    mode = mode or ("lazy" if lazy else "eager")
    idx = np.array(sorted(gammas), dtype=np.intp)
    if idx.size == 0 or idx[0] <= start:
        raise ValueError("active constraints must lie after the stage start")
    g = np.array([gammas[j] for j in idx], dtype=float)
    stage = _Stage(ctx.suffix(start), idx - start - 1, g, cache=(mode != "batch"))
    mu, k, solved, cands = _run(stage, mode)
    return StageResult(start, mu, int(idx[k]), solved, idx, g, cands)


def _objective(ctx: StageContext, x: np.ndarray) -> float:
    problem = ctx.problem
    total = 0.0
    groups, generic = problem.groups
    with np.errstate(over="ignore", divide="ignore"):
        for g in groups:
            total += float(np.sum(g.cls._bvalue(g.params, x[g.index])))
    for i in generic:
        total += problem.terms[i].value(float(x[i]))
    return total


def solve(problem: Problem, tol: Tolerances = DEFAULT_TOL, lazy: bool = False,
          mode: str | None = None, trace: bool = True) -> Solution:
    """Solve the problem stage by stage.

    Parameters
    ----------
    problem : Problem
    tol : Tolerances
    lazy : bool
        Skip stage equations that cannot beat the best candidate so far.
    mode : {"eager", "lazy", "batch"}, optional
        Overrides ``lazy``. ``"batch"`` finds each stage maximum with a single
        bisection over all active constraints; it gives the same stages and
        is the only practical choice for large N.
    trace : bool
        Keep per-stage budgets and candidates.

    Raises
    ------
    InfeasibleError, IllPosedError, BracketFailure
    """
    mode = mode or ("lazy" if lazy else "eager")
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")
    ctx = prepare(problem, tol)
    n = problem.n
    cons = ctx.cons
    gamma = ctx.rho.copy()
    x = np.empty(n)
    sigma = np.zeros(n)
    stages = []
    start, act = 0, 0
    while act < len(cons):
        suffix = ctx.suffix(start)
        g = gamma[act:]
        stage = _Stage(suffix, cons[act:] - start, g, cache=(mode != "batch"))
        mu, k, solved, cands = _run(stage, mode)
        end = int(cons[act + k]) + 1
        sigma[start:end] = mu
        x[start:end] = suffix.xi(mu)[: end - start]
        if trace:
            stages.append(StageResult(start, mu, end, solved, cons[act:] + 1, g.copy(), cands))
        else:
            stages.append(StageResult(start, mu, end, solved))
        gamma[act + k + 1:] -= gamma[act + k]
        act += k + 1
        start = end
    if start < n:
        tail = ctx.suffix(start).xi(0.0)
        free = ~ctx.fixed[start:]
        if np.any(np.isinf(tail[free])):
            bad = start + int(np.flatnonzero(np.isinf(tail) & free)[0]) + 1
            raise IllPosedError(bad, f"ill-posed: x_{bad} is unbounded above")
        x[start:] = tail
    x[ctx.fixed] = ctx.lower[ctx.fixed]
    return Solution(x, sigma, _objective(ctx, x), tuple(stages), ctx.report, mode)


def stage_trace_gammas(solution: Solution) -> list[dict[int, float]]:
    """Residual budgets entering each stage, keyed by 1-based constraint index."""
    if solution.stages and solution.stages[0].indices is None:
        raise ValueError("solution was produced without a trace")
    return [st.gamma_map() for st in solution.stages]
