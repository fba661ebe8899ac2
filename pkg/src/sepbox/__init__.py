"""Exact solver for separable convex programs with prefix-sum budgets and box bounds."""

from __future__ import annotations

from .engine import Solution, StageResult, solve
from .errors import BracketFailure, DomainError, IllPosedError, InfeasibleError, SolverError
from .oracle import CertificateReport, certify, grid_reference, kkt_certificate, objective_value
from .preprocess import CaseKind, CaseLabel, classify_term, preprocess
from .problem import DEFAULT_TOL, Box, Problem, Tolerances, validate
from .terms import Exponential, NegLog, ObjectiveTerm, Quadratic, Reciprocal

__all__ = [
    "Box", "BracketFailure", "CaseKind", "CaseLabel", "CertificateReport", "DEFAULT_TOL",
    "DomainError", "Exponential", "IllPosedError", "InfeasibleError", "NegLog", "ObjectiveTerm",
    "Problem", "Quadratic", "Reciprocal", "Solution", "SolverError", "StageResult", "Tolerances",
    "certify", "classify_term", "grid_reference", "kkt_certificate", "objective_value",
    "preprocess", "solve", "validate",
]
