from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepbox import (Exponential, IllPosedError, InfeasibleError, NegLog, Problem, Quadratic, certify, solve)
from sepbox.engine import cumulative_c, prepare, run_stage, solve_stage_equation, stage_trace_gammas, xi

from instances import random_problem, worked_example

inf = math.inf
E = math.e


def test_xi_branches():
    assert xi(Exponential(2.0), -inf, 0.4, 4.451) == pytest.approx(-0.800, abs=1e-3)
    assert xi(Exponential(5.0), -inf, -1.2, 4.451) == -1.2
    assert xi(Quadratic(2.0), 0.0, 1.5, 3.0) == 0.0
    assert xi(Exponential(1.0), -inf, 0.0, 0.0) == 0.0


def test_cumulative_c_worked_example():
    ctx = prepare(worked_example())
    assert cumulative_c(ctx, 0, 1, 0.5) == 0.4
    assert cumulative_c(ctx, 0, 2, 4.451) == pytest.approx(-2.0, abs=1e-3)
    assert cumulative_c(ctx, 0, 4, 2.307) == pytest.approx(-1.9, abs=1e-3)


def test_stage_equations_worked_example():
    ctx = prepare(worked_example())
    assert solve_stage_equation(ctx, 0, 1, 0.2) == pytest.approx(1.637, abs=1e-3)
    assert solve_stage_equation(ctx, 0, 1, 0.2) == pytest.approx(2 * math.exp(-0.2), rel=1e-15)
    assert solve_stage_equation(ctx, 0, 4, -1.9) == pytest.approx(2.307, abs=1e-3)
    assert solve_stage_equation(ctx, 2, 3, 3.1) == 0.0


def test_stage_equation_is_smallest_float():
    ctx = prepare(worked_example())
    s = solve_stage_equation(ctx, 0, 2, -2.0)
    assert cumulative_c(ctx, 0, 2, s) <= -2.0
    assert cumulative_c(ctx, 0, 2, math.nextafter(s, 0.0)) > -2.0


def test_run_stage_worked_example():
    ctx = prepare(worked_example())
    r = run_stage(ctx, 0, {1: 0.2, 2: -2.0, 3: 1.1, 4: -1.9})
    assert r.mu_star == pytest.approx(4.451, abs=1e-3) and r.k_star == 2
    lazy = run_stage(ctx, 0, {1: 0.2, 2: -2.0, 3: 1.1, 4: -1.9}, lazy=True)
    assert (lazy.mu_star, lazy.k_star) == (r.mu_star, r.k_star)
    assert lazy.solved == 2
    assert lazy.candidate_map()[3] is None and lazy.candidate_map()[4] is None


def test_tie_breaks_to_largest_index():
    # xi(s) = 1 - ln s on u = 10; both equations give s = 1
    p = Problem.from_arrays([Exponential(E), Exponential(E)], upper=[10.0, 10.0], rho=[1.0, 2.0])
    sol = solve(p)
    st0 = sol.stages[0]
    assert st0.candidates == pytest.approx([1.0, 1.0], abs=1e-12)
    assert st0.k_star == 2 and len(sol.stages) == 1
    assert certify(p, sol).passed


def test_solve_worked_example():
    sol = solve(worked_example())
    assert sol.x == pytest.approx([-0.8, -1.2, 1.9, -1.8], abs=1e-3)
    assert sol.sigma[:2] == pytest.approx([4.451, 4.451], abs=1e-3)
    # self-consistent second-stage level, 8 e^{-1.9}
    assert sol.sigma[2:] == pytest.approx([8 * math.exp(-1.9)] * 2, rel=1e-12)
    assert stage_trace_gammas(sol)[1] == pytest.approx({3: 3.1, 4: 0.1})


def test_unconstrained_single_variable():
    sol = solve(Problem.from_arrays([Exponential(1.0)], upper=[0.0], rho=[5.0]))
    assert sol.sigma[0] == 0.0 and sol.x[0] == 0.0


def test_waterfilling():
    p = Problem.from_arrays([NegLog(1.0), NegLog(2.0)], [0.0, 0.0], None, rho={2: 3.0})
    sol = solve(p)
    assert sol.x == pytest.approx([2.0, 1.0], abs=1e-12)
    assert sol.sigma == pytest.approx([1 / 3, 1 / 3], abs=1e-12)
    assert stage_trace_gammas(sol) == [{2: 3.0}]


def test_unconstrained_tail_gets_upper():
    p = Problem.from_arrays([Exponential(1.0), Exponential(1.0), Quadratic(0.5)],
                            None, [1.0, 2.0, 3.0], rho={1: 0.0})
    sol = solve(p)
    assert sol.x.tolist()[1:] == [2.0, 0.5]
    assert sol.sigma.tolist()[1:] == [0.0, 0.0]


def test_fixed_variables_reinserted():
    p = Problem.from_arrays([Exponential(1.0), Quadratic(-3.0), Exponential(1.0)],
                            [None, 1.0, None], [2.0, 4.0, 2.0], rho=[0.0, 1.0, 3.0])
    sol = solve(p)
    assert sol.x[1] == 1.0
    assert np.all(np.cumsum(sol.x) <= np.array([0.0, 1.0, 3.0]) + 1e-12)
    assert certify(p, sol).passed


def test_errors():
    with pytest.raises(InfeasibleError) as e:
        solve(Problem.from_arrays([Exponential(1.0)] * 2, [0, 2], [5, 5], [1, 1]))
    assert e.value.index == 2
    with pytest.raises(IllPosedError):
        solve(Problem.from_arrays([Exponential(1.0)] * 2, rho={1: 0.0}))
    with pytest.raises(ValueError):
        solve(worked_example(), mode="fast")


def test_trace_off_keeps_stage_summary():
    sol = solve(worked_example(), trace=False)
    assert [s.k_star for s in sol.stages] == [2, 4]
    with pytest.raises(ValueError):
        stage_trace_gammas(sol)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_modes_agree_and_certify(seed):
    p = random_problem(np.random.default_rng(seed))
    sols = [solve(p, mode=m) for m in ("eager", "lazy", "batch")]
    key = [(s.mu_star, s.k_star) for s in sols[0].stages]
    for other in sols[1:]:
        assert [(s.mu_star, s.k_star) for s in other.stages] == key
        assert np.array_equal(other.x, sols[0].x)
    assert certify(p, sols[0]).passed
    assert np.all(np.diff(sols[0].sigma) <= 0)
    assert len(sols[0].stages) <= p.n


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 5.0))
def test_objective_nonincreasing_when_budget_grows(seed, bump):
    rng = np.random.default_rng(seed)
    p = random_problem(rng)
    j = int(rng.choice(p.constraints))
    looser = Problem(p.terms, p.boxes, {**p.budgets, j: p.budgets[j] + bump})
    assert solve(looser).objective <= solve(p).objective + 1e-9 * max(1.0, abs(solve(p).objective))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_clamp_consistency(seed):
    p = random_problem(np.random.default_rng(seed))
    sol = solve(p)
    up = sol.report.upper_prime
    for n, (term, x, s) in enumerate(zip(p.terms, sol.x, sol.sigma)):
        at_bound = any(math.isfinite(b) and abs(x - b) <= 1e-9 * max(1.0, abs(b)) for b in (p.lower[n], up[n]))
        assert at_bound or abs(term.neg_slope(x) - s) <= 1e-6
