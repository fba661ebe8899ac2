"""Bracketed bisection on monotone predicates and functions.

Multipliers are searched on the bit pattern of nonnegative doubles, which is
monotone in the value. The search therefore ends on two adjacent floats and
returns the *smallest* float satisfying the predicate, so two callers asking
the same question always get the same answer.
"""

from __future__ import annotations

import math
import struct
from typing import Callable

from .errors import BracketFailure

TINY = 2.2250738585072014e-308  # smallest positive normal double
HUGE = 1e308


def _bits(x: float) -> int:
    return struct.unpack("<q", struct.pack("<d", x))[0]


def _from_bits(b: int) -> float:
    return struct.unpack("<d", struct.pack("<q", b))[0]


def prev_float(x: float) -> float:
    return math.nextafter(x, -math.inf)


def smallest_true(pred: Callable[[float], bool], lo: float, hi: float) -> float:
    """Smallest float in ``(lo, hi]`` where a monotone predicate holds.

    Requires ``0 <= lo < hi``, ``pred(lo)`` false and ``pred(hi)`` true.
    """
    blo, bhi = _bits(lo), _bits(hi)
    while bhi - blo > 1:
        mid = (blo + bhi) // 2
        if pred(_from_bits(mid)):
            bhi = mid
        else:
            blo = mid
    return _from_bits(bhi)


def bracket_from_one(pred: Callable[[float], bool]) -> tuple[float, float]:
    """Return ``(lo, hi)`` with ``pred(lo)`` false and ``pred(hi)`` true.

    Starts at 1, doubling for the upper end and halving for the lower end.
    When halving reaches the smallest normal magnitude the lower end falls
    back to 0; callers must know that ``pred(0)`` is false.
    """
    if pred(1.0):
        hi, lo = 1.0, 0.5
        while pred(lo):
            hi = lo
            lo *= 0.5
            if lo < TINY:
                return 0.0, hi
        return lo, hi
    lo, hi = 1.0, 2.0
    while not pred(hi):
        lo = hi
        hi *= 2.0
        if hi > HUGE:
            raise BracketFailure("no upper bracket below 1e308")
    return lo, hi


def bisect_sign(f: Callable[[float], float], lo: float, hi: float, tol: float,
                max_iter: int = 400) -> float:
    """Root of an increasing function on a finite ``[lo, hi]`` with ``f(lo) <= 0 <= f(hi)``."""
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
