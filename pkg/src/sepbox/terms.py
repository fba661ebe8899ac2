"""Objective-term families.

Each summand ``f(x)`` of a separable objective is an :class:`ObjectiveTerm`.
The solver works with the negated slope ``h(x) = -f'(x)`` and its inverse, so
every family exposes value, slope, ``h`` and ``h^{-1}``.

Built-in families::

    Exponential(w)     f = w * exp(-x)            x in R
    NegLog(a)          f = -log(a + x)            x > -a
    Quadratic(t)       f = (x - t)**2 / 2         x in R
    Reciprocal(w, a)   f = w / (x + a)            x > -a

New families subclass :class:`ObjectiveTerm` and implement ``value`` and
``slope``. ``inverse_neg_slope`` and ``stationary_point`` are optional; when
missing, the solver bisects on the slope instead.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, fields
from typing import ClassVar, Sequence

import numpy as np

from .errors import DomainError

INF = math.inf


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return INF


class ObjectiveTerm(ABC):
    """One strictly convex, continuously differentiable summand."""

    family: ClassVar[str] = "custom"
    # Built-ins set this and implement the ``_b*`` classmethods below.
    vectorized: ClassVar[bool] = False

    def domain(self) -> tuple[float, float]:
        """Closure of the natural domain as ``(lo, hi)``; endpoints may be infinite."""
        return (-INF, INF)

    def _check(self, x: float) -> None:
        lo, hi = self.domain()
        if math.isnan(x) or x < lo or x > hi:
            raise DomainError(f"x={x!r} outside the domain [{lo}, {hi}] of {self!r}")

    @abstractmethod
    def value(self, x: float) -> float:
        """f(x); one-sided limits at domain endpoints (possibly +inf)."""

    @abstractmethod
    def slope(self, x: float) -> float:
        """f'(x); one-sided limits at domain endpoints."""

    def neg_slope(self, x: float) -> float:
        return -self.slope(x)

    def inverse_neg_slope(self, varsigma: float) -> float:
        """The unique x with ``-f'(x) == varsigma`` (no clamping)."""
        raise NotImplementedError

    def stationary_point(self) -> float | None:
        """Root of f' on the domain, or None when f' never vanishes.

        Raising NotImplementedError means "unknown"; classification then
        falls back to sign probes and bisection.
        """
        raise NotImplementedError

    def params(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}  # type: ignore[arg-type]

    # -- vectorized hooks, used by the engine on groups of one family -----

    @classmethod
    def _bpack(cls, terms: Sequence["ObjectiveTerm"]) -> dict[str, np.ndarray]:
        raise NotImplementedError

    @classmethod
    def _bvalue(cls, P: dict[str, np.ndarray], x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @classmethod
    def _bslope(cls, P: dict[str, np.ndarray], x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @classmethod
    def _binverse(cls, P: dict[str, np.ndarray], s: float) -> np.ndarray:
        """h^{-1}(s) for every member; ``s == 0`` maps to the +inf limit."""
        raise NotImplementedError

    @classmethod
    def _bstationary(cls, P: dict[str, np.ndarray]) -> np.ndarray:
        """Stationary points, NaN where none exists."""
        raise NotImplementedError

    @classmethod
    def _bdomain_lo(cls, P: dict[str, np.ndarray]) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(ObjectiveTerm):
    """``f(x) = w * exp(-x)``, always decreasing."""

    w: float
    family: ClassVar[str] = "exp"
    vectorized: ClassVar[bool] = True

    def __post_init__(self):
        if not (self.w > 0 and math.isfinite(self.w)):
            raise ValueError(f"Exponential needs w > 0, got {self.w!r}")

    def value(self, x):
        self._check(x)
        return self.w * _exp(-x)

    def slope(self, x):
        self._check(x)
        return -self.w * _exp(-x)

    def inverse_neg_slope(self, varsigma):
        if not varsigma > 0:
            raise DomainError(f"h^-1({varsigma!r}) undefined for {self!r}")
        return math.log(self.w) - math.log(varsigma)

    def stationary_point(self):
        return None

    @classmethod
    def _bpack(cls, terms):
        w = np.array([t.w for t in terms], dtype=float)
        return {"w": w, "logw": np.log(w)}

    @classmethod
    def _bvalue(cls, P, x):
        return P["w"] * np.exp(-x)

    @classmethod
    def _bslope(cls, P, x):
        return -P["w"] * np.exp(-x)

    @classmethod
    def _binverse(cls, P, s):
        # math.log(0) raises; the limit is -inf
        ls = math.log(s) if s > 0 else -INF
        return P["logw"] - ls

    @classmethod
    def _bstationary(cls, P):
        return np.full(P["w"].shape, np.nan)

    @classmethod
    def _bdomain_lo(cls, P):
        return np.full(P["w"].shape, -INF)


@dataclass(frozen=True)
class NegLog(ObjectiveTerm):
    """``f(x) = -log(a + x)`` on ``x > -a``; the classic waterfilling term."""

    a: float
    family: ClassVar[str] = "neglog"
    vectorized: ClassVar[bool] = True

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise ValueError(f"NegLog needs a finite a, got {self.a!r}")

    def domain(self):
        return (-self.a, INF)

    def value(self, x):
        self._check(x)
        y = self.a + x
        return INF if y == 0 else -math.log(y)

    def slope(self, x):
        self._check(x)
        y = self.a + x
        return -INF if y == 0 else -1.0 / y

    def inverse_neg_slope(self, varsigma):
        if not varsigma > 0:
            raise DomainError(f"h^-1({varsigma!r}) undefined for {self!r}")
        return 1.0 / varsigma - self.a

    def stationary_point(self):
        return None

    @classmethod
    def _bpack(cls, terms):
        return {"a": np.array([t.a for t in terms], dtype=float)}

    @classmethod
    def _bvalue(cls, P, x):
        return -np.log(P["a"] + x)

    @classmethod
    def _bslope(cls, P, x):
        return -1.0 / (P["a"] + x)

    @classmethod
    def _binverse(cls, P, s):
        inv = 1.0 / s if s > 0 else INF
        return inv - P["a"]

    @classmethod
    def _bstationary(cls, P):
        return np.full(P["a"].shape, np.nan)

    @classmethod
    def _bdomain_lo(cls, P):
        return -P["a"]


@dataclass(frozen=True)
class Quadratic(ObjectiveTerm):
    """``f(x) = (x - t)**2 / 2``, minimized at ``t``."""

    t: float
    family: ClassVar[str] = "quadratic"
    vectorized: ClassVar[bool] = True

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError(f"Quadratic needs a finite t, got {self.t!r}")

    def value(self, x):
        self._check(x)
        return 0.5 * (x - self.t) ** 2

    def slope(self, x):
        self._check(x)
        return x - self.t

    def inverse_neg_slope(self, varsigma):
        if math.isnan(varsigma):
            raise DomainError("h^-1(nan)")
        return self.t - varsigma

    def stationary_point(self):
        return self.t

    @classmethod
    def _bpack(cls, terms):
        return {"t": np.array([q.t for q in terms], dtype=float)}

    @classmethod
    def _bvalue(cls, P, x):
        return 0.5 * (x - P["t"]) ** 2

    @classmethod
    def _bslope(cls, P, x):
        return x - P["t"]

    @classmethod
    def _binverse(cls, P, s):
        return P["t"] - s

    @classmethod
    def _bstationary(cls, P):
        return P["t"].copy()

    @classmethod
    def _bdomain_lo(cls, P):
        return np.full(P["t"].shape, -INF)


@dataclass(frozen=True)
class Reciprocal(ObjectiveTerm):
    """``f(x) = w / (x + a)`` on ``x > -a``."""

    w: float
    a: float
    family: ClassVar[str] = "reciprocal"
    vectorized: ClassVar[bool] = True

    def __post_init__(self):
        if not (self.w > 0 and math.isfinite(self.w)):
            raise ValueError(f"Reciprocal needs w > 0, got {self.w!r}")
        if not math.isfinite(self.a):
            raise ValueError(f"Reciprocal needs a finite a, got {self.a!r}")

    def domain(self):
        return (-self.a, INF)

    def value(self, x):
        self._check(x)
        y = x + self.a
        return INF if y == 0 else self.w / y

    def slope(self, x):
        self._check(x)
        y = x + self.a
        return -INF if y == 0 else -self.w / (y * y)

    def inverse_neg_slope(self, varsigma):
        if not varsigma > 0:
            raise DomainError(f"h^-1({varsigma!r}) undefined for {self!r}")
        return math.sqrt(self.w / varsigma) - self.a

    def stationary_point(self):
        return None

    @classmethod
    def _bpack(cls, terms):
        return {"w": np.array([t.w for t in terms], dtype=float),
                "a": np.array([t.a for t in terms], dtype=float)}

    @classmethod
    def _bvalue(cls, P, x):
        return P["w"] / (x + P["a"])

    @classmethod
    def _bslope(cls, P, x):
        y = x + P["a"]
        return -P["w"] / (y * y)

    @classmethod
    def _binverse(cls, P, s):
        if s > 0:
            return np.sqrt(P["w"] / s) - P["a"]
        return np.full(P["w"].shape, INF)

    @classmethod
    def _bstationary(cls, P):
        return np.full(P["w"].shape, np.nan)

    @classmethod
    def _bdomain_lo(cls, P):
        return -P["a"]


FAMILIES: dict[str, type[ObjectiveTerm]] = {
    cls.family: cls for cls in (Exponential, NegLog, Quadratic, Reciprocal)
}


def term_value(term: ObjectiveTerm, x: float) -> float:
    return term.value(x)


def term_slope(term: ObjectiveTerm, x: float) -> float:
    return term.slope(x)


def inverse_slope(term: ObjectiveTerm, varsigma: float) -> float:
    """Unclamped ``h^{-1}(varsigma)`` for a term."""
    return term.inverse_neg_slope(varsigma)


@dataclass(frozen=True)
class TermGroup:
    """Indices (0-based, increasing) of one vectorized family and its packed parameters."""

    cls: type[ObjectiveTerm]
    index: np.ndarray
    params: dict[str, np.ndarray]

    def take(self, mask: np.ndarray) -> "TermGroup":
        return TermGroup(self.cls, self.index[mask], {k: v[mask] for k, v in self.params.items()})


def group_terms(terms: Sequence[ObjectiveTerm]) -> tuple[list[TermGroup], np.ndarray]:
    """Split terms into vectorized family groups plus leftover (generic) indices."""
    buckets: dict[type, list[int]] = {}
    generic = []
    for i, term in enumerate(terms):
        if type(term).vectorized:
            buckets.setdefault(type(term), []).append(i)
        else:
            generic.append(i)
    groups = [TermGroup(cls, np.asarray(ix, dtype=np.intp), cls._bpack([terms[i] for i in ix]))
              for cls, ix in buckets.items()]
    return groups, np.asarray(generic, dtype=np.intp)
