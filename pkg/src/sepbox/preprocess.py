"""Reduce a problem to one whose terms are all strictly decreasing on their boxes.

A strictly convex term on its box is either increasing, has an interior
minimum ``z``, or is decreasing. Increasing terms sit at their lower bound in
every optimum, so they are fixed there and their bounds are subtracted from
the budgets that cover them. Terms with an interior minimum never go past
``z``, so their upper bound is tightened to ``z``. What is left is decreasing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import IllPosedError
from .problem import DEFAULT_TOL, Box, Problem, Tolerances
from .roots import bisect_sign
from .terms import ObjectiveTerm

INF = math.inf


class CaseKind(enum.IntEnum):
    INCREASING = 0
    INTERIOR_MIN = 1
    DECREASING = 2


@dataclass(frozen=True)
class CaseLabel:
    kind: CaseKind
    z: float | None = None

    def __post_init__(self):
        if (self.kind is CaseKind.INTERIOR_MIN) != (self.z is not None):
            raise ValueError("a stationary point goes with INTERIOR_MIN only")


INCREASING = CaseLabel(CaseKind.INCREASING)
DECREASING = CaseLabel(CaseKind.DECREASING)


def _interior_point(lo: float, hi: float) -> float:
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    if math.isfinite(lo):
        return lo + max(1.0, abs(lo))
    if math.isfinite(hi):
        return hi - max(1.0, abs(hi))
    return 0.0


def _probes(lo: float, hi: float, eps: float) -> tuple[float, float]:
    """Points just inside both ends; infinite ends are replaced by far points."""
    mid = _interior_point(lo, hi)
    far = 1e6 * max(1.0, abs(mid))
    if math.isfinite(lo) and math.isfinite(hi):
        step = eps * (hi - lo)
        return lo + step, hi - step
    a = lo + eps * max(1.0, abs(lo)) if math.isfinite(lo) else mid - far
    b = hi - eps * max(1.0, abs(hi)) if math.isfinite(hi) else mid + far
    return a, b


def _label_from_z(z: float | None, term: ObjectiveTerm, box: Box) -> CaseLabel:
    if z is None:
        s = term.slope(_interior_point(box.lower, box.upper))
        return DECREASING if s < 0 else INCREASING
    if z <= box.lower:
        return INCREASING
    if z >= box.upper:
        return DECREASING
    return CaseLabel(CaseKind.INTERIOR_MIN, float(z))


def classify_term(term: ObjectiveTerm, box: Box, tol: Tolerances = DEFAULT_TOL) -> CaseLabel:
    """Case of ``term`` on ``box``: increasing, interior minimum, or decreasing."""
    try:
        z = term.stationary_point()
    except NotImplementedError:
        pass
    else:
        return _label_from_z(z, term, box)
    # no analytic shape: slope signs just inside both ends, then bisect
    a, b = _probes(box.lower, box.upper, tol.root_tol)
    sa, sb = term.slope(a), term.slope(b)
    if sa >= 0:
        return INCREASING
    if sb <= 0:
        return DECREASING
    z = bisect_sign(term.slope, a, b, tol.root_tol)
    return CaseLabel(CaseKind.INTERIOR_MIN, z)


@dataclass(frozen=True)
class Classification:
    """Per-variable case codes and stationary points (NaN unless interior)."""

    kinds: np.ndarray
    z: np.ndarray

    def __len__(self):
        return len(self.kinds)

    def __getitem__(self, i: int) -> CaseLabel:
        k = CaseKind(int(self.kinds[i]))
        return CaseLabel(k, float(self.z[i]) if k is CaseKind.INTERIOR_MIN else None)

    @property
    def labels(self) -> list[CaseLabel]:
        return [self[i] for i in range(len(self))]

    @classmethod
    def from_labels(cls, labels: Sequence[CaseLabel]) -> "Classification":
        kinds = np.array([int(lb.kind) for lb in labels], dtype=np.int8)
        z = np.array([np.nan if lb.z is None else lb.z for lb in labels])
        return cls(kinds, z)


def classify_problem(problem: Problem, tol: Tolerances = DEFAULT_TOL) -> Classification:
    """Classify every term; built-in families are handled in bulk."""
    n = problem.n
    kinds = np.empty(n, dtype=np.int8)
    z = np.full(n, np.nan)
    lower, upper = problem.lower, problem.upper
    groups, generic = problem.groups
    for g in groups:
        lo, hi = lower[g.index], upper[g.index]
        zg = g.cls._bstationary(g.params)
        has_z = ~np.isnan(zg)
        with np.errstate(invalid="ignore"):
            k = np.where(zg <= lo, CaseKind.INCREASING,
                         np.where(zg >= hi, CaseKind.DECREASING, CaseKind.INTERIOR_MIN))
        if not has_z.all():
            probe = np.array([_interior_point(a, b) for a, b in zip(lo[~has_z], hi[~has_z])])
            sub = {key: v[~has_z] for key, v in g.params.items()}
            s = g.cls._bslope(sub, probe)
            k[~has_z] = np.where(s < 0, CaseKind.DECREASING, CaseKind.INCREASING)
        kinds[g.index] = k
        inner = k == CaseKind.INTERIOR_MIN
        z[g.index[inner]] = zg[inner]
    for i in generic:
        lb = classify_term(problem.terms[i], problem.boxes[i], tol)
        kinds[i] = lb.kind
        if lb.z is not None:
            z[i] = lb.z
    return Classification(kinds, z)


@dataclass(frozen=True)
class PreprocessReport:
    """Outcome of the reduction.

    ``rho_prime`` is aligned with ``problem.constraints``; ``upper_prime``
    has one entry per variable (fixed variables keep their original upper).
    """

    problem: Problem
    classification: Classification
    fixed_mask: np.ndarray
    rho_prime: np.ndarray
    upper_prime: np.ndarray
    tightened: bool = False

    @property
    def labels(self) -> list[CaseLabel]:
        return self.classification.labels

    @property
    def fixed(self) -> Mapping[int, float]:
        """1-based index to its fixed value ``l_n``."""
        idx = np.flatnonzero(self.fixed_mask)
        return MappingProxyType({int(i) + 1: float(self.problem.lower[i]) for i in idx})

    @property
    def surviving_indices(self) -> tuple[int, ...]:
        return tuple(int(i) + 1 for i in np.flatnonzero(~self.fixed_mask))

    @property
    def adjusted_budgets(self) -> Mapping[int, float]:
        """Adjusted budgets for constraints that still cover a surviving variable."""
        first = np.flatnonzero(~self.fixed_mask)
        first = int(first[0]) + 1 if first.size else self.problem.n + 1
        return MappingProxyType({int(j): float(r) for j, r in zip(self.problem.constraints, self.rho_prime)
                                 if j >= first})

    @property
    def tightened_uppers(self) -> Mapping[int, float]:
        return MappingProxyType({i: float(self.upper_prime[i - 1]) for i in self.surviving_indices})


def apply_lemma1(problem: Problem, labels) -> PreprocessReport:
    """Fix increasing terms at their lower bound and shift the budgets.

    Raises
    ------
    IllPosedError
        If an increasing term has ``l_n = -inf``.
    """
    cls_ = labels if isinstance(labels, Classification) else Classification.from_labels(labels)
    if len(cls_) != problem.n:
        raise ValueError("one label per term is required")
    fixed = cls_.kinds == CaseKind.INCREASING
    lower = problem.lower
    bad = np.flatnonzero(fixed & np.isneginf(lower))
    if bad.size:
        n = int(bad[0]) + 1
        raise IllPosedError(n, f"ill-posed: term {n} is increasing on its box but has no lower bound")
    shift = np.cumsum(np.where(fixed, lower, 0.0))
    rho_prime = problem.rho - shift[problem.constraints - 1]
    return PreprocessReport(problem, cls_, fixed, rho_prime, problem.upper.copy())


def apply_lemma2(report: PreprocessReport) -> PreprocessReport:
    """Tighten the upper bound of every interior-minimum term to its stationary point."""
    inner = report.classification.kinds == CaseKind.INTERIOR_MIN
    upper = np.where(inner, report.classification.z, report.upper_prime)
    return replace(report, upper_prime=upper, tightened=True)


def preprocess(problem: Problem, tol: Tolerances = DEFAULT_TOL) -> PreprocessReport:
    return apply_lemma2(apply_lemma1(problem, classify_problem(problem, tol)))
