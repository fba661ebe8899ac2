from __future__ import annotations

import math

import numpy as np
import pytest

from sepbox import Exponential, NegLog, Problem, Quadratic, certify, grid_reference, kkt_certificate, objective_value, solve
from sepbox.oracle import EmptyFeasibleSet, granularity_bound

from instances import worked_example

REF_X = [-0.8, -1.2, 1.9, -1.8]


def test_objective_value():
    direct = 2 * math.exp(0.8) + 5 * math.exp(1.2) + 8 * math.exp(-1.9) + 0.5 * math.exp(1.8)
    assert objective_value(worked_example(), REF_X) == pytest.approx(direct, rel=1e-15)
    assert direct == pytest.approx(25.273, abs=1e-3)
    assert objective_value(Problem.from_arrays([Quadratic(0.0)] * 3, rho=[1, 1, 1]), [0, 0, 0]) == 0.0
    assert objective_value(Problem.from_arrays([NegLog(1.0)], [0.0], rho=[1.0]), [0.0]) == 0.0
    with pytest.raises(ValueError):
        objective_value(worked_example(), [0.0])


def test_certificate_on_worked_example():
    p = worked_example()
    sol = solve(p)
    rep = certify(p, sol)
    assert rep.passed
    s12 = 2 * math.exp(0.8)                                          # h1(x1) with x1 = -0.8 interior
    s34 = 8 * math.exp(-1.9)                                         # h3(x3) with x3 = 1.9 interior
    assert rep.lam[1] == 0.0 and rep.lam[3] == 0.0
    assert rep.lam[2] == pytest.approx(s12 - s34, abs=1e-9)
    assert rep.lam[4] == pytest.approx(s34, abs=1e-9)


def test_certificate_detects_stationarity():
    p = worked_example()
    sol = solve(p)
    x = sol.x.copy()
    x[2] = 1.8
    rep = kkt_certificate(p, x, sol.sigma)
    assert not rep.passed
    assert rep.stationarity > 1e-2 and rep.worst["stationarity"] == 3


def test_certificate_detects_box_violation():
    p = worked_example()
    sol = solve(p)
    x = sol.x.copy()
    x[1] = -1.1
    rep = kkt_certificate(p, x, sol.sigma)
    assert rep.feasibility > 0 and not rep.passed


def test_certificate_detects_negative_multiplier():
    p = worked_example()
    sol = solve(p)
    sigma = sol.sigma.copy()
    sigma[2:] = 5.0
    rep = kkt_certificate(p, sol.x, sigma)
    assert rep.sign > 0 and rep.worst["sign"] == 2


def test_certificate_shape_check():
    with pytest.raises(ValueError):
        kkt_certificate(worked_example(), [0.0] * 3, [0.0] * 4)


def test_grid_reference_quadratic():
    p = Problem.from_arrays([Quadratic(2.0)] * 2, [0, 0], [1, 1], rho=[1.0, 1.5])
    x, obj = grid_reference(p, 200)
    # the symmetric split beats [1, 0.5]: 2 * 1.25**2 < 1 + 1.5**2
    assert x == pytest.approx([0.75, 0.75], abs=1e-12)
    assert solve(p).x == pytest.approx([0.75, 0.75], abs=1e-12)
    assert solve(p).objective <= obj + granularity_bound(p, 200)


def test_grid_reference_infeasible():
    p = Problem.from_arrays([Quadratic(2.0)] * 2, [0.5, 0.5], [1, 1], rho=[1.0, 1.5])
    p = Problem(p.terms, p.boxes, {1: 1.0, 2: 0.8})
    with pytest.raises(EmptyFeasibleSet):
        grid_reference(p, 10)


def test_grid_reference_worked_example_clipped():
    p = worked_example()
    clipped = Problem.from_arrays(p.terms, [-3.0] * 4, p.upper, p.rho)
    _, obj = grid_reference(clipped, 60)
    eng = solve(clipped).objective
    assert eng == pytest.approx(25.273, abs=1e-3)
    assert eng <= obj + granularity_bound(clipped, 60)
    assert obj - eng <= granularity_bound(clipped, 60)


def test_grid_reference_limits():
    with pytest.raises(ValueError):
        grid_reference(worked_example(), 10)
    with pytest.raises(ValueError):
        grid_reference(Problem.from_arrays([Quadratic(0.0)] * 5, [0] * 5, [1] * 5, rho=[5] * 5), 2)
    with pytest.raises(ValueError):
        grid_reference(Problem.from_arrays([Quadratic(0.0)] * 4, [0] * 4, [1] * 4, rho=[5] * 4), 400)
