"""Bounds on the region swept by the nodal point.

In scaled coordinates X0 = sin((1+c)t)/sin(ct), Y0 = sin(t)/sin((1+c)t) the
nodal point satisfies one of four families of inequalities (cases A-D), each a
band between two hyperbola-like curves in (|X0|, |Y0|). The permissible
domain is their union. A central region around the origin is never visited.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EmptyInterval
from .field import ModelParams, NodalFrame, TOL_DIV

BOUNDARY_TOL = 1e-9
TWO_OVER_PI = 2 / math.pi
HALF_PI = math.pi / 2


class ScaledNodal(NamedTuple):
    X0: float
    Y0: float


@dataclass(frozen=True)
class BoundVerdict:
    case_a_ok: bool
    case_b_ok: bool
    case_c_ok: bool
    case_d_ok: bool

    @property
    def permissible(self) -> bool:
        return self.case_a_ok or self.case_b_ok or self.case_c_ok or self.case_d_ok


def scale_to_X0Y0(p: ModelParams, nf: NodalFrame) -> ScaledNodal:
    if p.a == 0 or p.b == 0:
        raise ValueError("scaling requires a != 0 and b != 0")
    return ScaledNodal(-p.a * nf.x0, -p.bsc * nf.y0 / p.a)


def unscale(p: ModelParams, X0, Y0):
    """Inverse of scale_to_X0Y0: returns (x0, y0)."""
    return -X0 / p.a, -p.a * Y0 / p.bsc


def _inv(den):
    return math.inf if den <= 0 else 1 / den


def bounds_case(case: str, absY0: float) -> list[tuple[float, float]]:
    """Closed intervals of |X0| allowed by one case at the given |Y0|.

    Case D returns the part of its band compatible with "|X0| <= 1 or |Y0| <= 2".
    Raises EmptyInterval when the case admits nothing at this |Y0|.
    """
    Y = float(absY0)
    if Y < 0:
        raise ValueError("absY0 must be non-negative")
    case = case.upper()
    if case == "A":
        if Y >= HALF_PI:
            raise EmptyInterval(f"case A admits no |X0| at |Y0|={Y}")
        lo, hi = 1 / (HALF_PI - Y), _inv(TWO_OVER_PI - Y)
    elif case == "B":
        if Y <= TWO_OVER_PI:
            raise EmptyInterval(f"case B admits no |X0| at |Y0|={Y}")
        lo, hi = 1 / (HALF_PI * Y - 1), _inv(TWO_OVER_PI * Y - 1)
    elif case == "C":
        lo, hi = TWO_OVER_PI / (Y + 1), HALF_PI / (Y + 1)
    elif case == "D":
        lo, hi = TWO_OVER_PI / (HALF_PI * Y + 1), _inv(TWO_OVER_PI - Y)
        if Y > 2:
            hi = min(hi, 1.0)
        if lo > hi:
            raise EmptyInterval(f"case D admits no |X0| at |Y0|={Y}")
    else:
        raise ValueError(f"unknown case {case!r}")
    return [(lo, hi)]


def _inside(X, intervals, tol):
    return any(lo - tol <= X <= hi + tol for lo, hi in intervals)


def permissible(absX0: float, absY0: float, tol: float = BOUNDARY_TOL) -> BoundVerdict:
    """Classify a scaled point against each case; the union decides.

    Taking the union is what makes Case B's outer limit win over Case D's
    |X0| <= 1 for |Y0| < pi, and the reverse beyond.
    """
    if absX0 < 0 or absY0 < 0:
        raise ValueError("inputs must be non-negative")
    ok = []
    for case in "ABCD":
        try:
            ok.append(_inside(absX0, bounds_case(case, absY0), tol))
        except EmptyInterval:
            ok.append(False)
    return BoundVerdict(*ok)


def permissible_many(absX0, absY0, tol: float = BOUNDARY_TOL) -> np.ndarray:
    """Vectorised union test, identical in outcome to ``permissible``."""
    X = np.asarray(absX0, dtype=float)
    Y = np.asarray(absY0, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        def upper(den):
            return np.where(den > 0, 1 / np.where(den > 0, den, 1.0), np.inf)

        a_ok = (Y < HALF_PI) & (X >= 1 / np.where(Y < HALF_PI, HALF_PI - Y, 1.0) - tol) \
            & (X <= upper(TWO_OVER_PI - Y) + tol)
        b_ok = (Y > TWO_OVER_PI) & (X >= 1 / np.where(Y > TWO_OVER_PI, HALF_PI * Y - 1, 1.0) - tol) \
            & (X <= upper(TWO_OVER_PI * Y - 1) + tol)
        c_ok = (X >= TWO_OVER_PI / (Y + 1) - tol) & (X <= HALF_PI / (Y + 1) + tol)
        d_hi = np.where(Y > 2, np.minimum(upper(TWO_OVER_PI - Y), 1.0), upper(TWO_OVER_PI - Y))
        d_ok = (X >= TWO_OVER_PI / (HALF_PI * Y + 1) - tol) & (X <= d_hi + tol)
    return a_ok | b_ok | c_ok | d_ok


def _quartic(X):
    return math.pi ** 4 * X ** 4 / 16 + math.pi * X / 2 - 1


def _quartic_prime(X):
    return math.pi ** 4 * X ** 3 / 4 + math.pi / 2


def solve_quartic_newton(x_start: float = 0.4, lo: float = 0.0, hi: float = 1.0) -> float:
    """Safeguarded Newton for the single root of the quartic on (lo, hi);
    falls back to bisection whenever a step leaves the bracket."""
    f_lo = _quartic(lo)
    X = x_start
    for _ in range(100):
        f = _quartic(X)
        if f == 0:
            return X
        if (f < 0) == (f_lo < 0):
            lo, f_lo = X, f
        else:
            hi = X
        step = X - f / _quartic_prime(X)
        X_new = step if lo < step < hi else 0.5 * (lo + hi)
        if abs(X_new - X) <= 1e-16 * max(1.0, abs(X)):
            return X_new
        X = X_new
    return X


def solve_quartic_bisection(lo: float = 0.1, hi: float = 1.0) -> float:
    f_lo = _quartic(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if (_quartic(mid) < 0) == (f_lo < 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def innermost_minimum() -> tuple[float, float]:
    """Closest approach (X0min, Y0min) of the innermost limiting curve (Case D's
    lower branch) to the origin of the scaled plane."""
    X = solve_quartic_newton()
    return X, TWO_OVER_PI * (2 / (math.pi * X) - 1)


def minimum_nodal_distance(p: ModelParams) -> float:
    """Lower bound on the distance of any nodal point from the origin."""
    X, Y = innermost_minimum()
    return math.hypot(X / p.a, p.a * Y / p.bsc)


@dataclass
class NodalSample:
    t: np.ndarray
    x0: np.ndarray
    y0: np.ndarray
    skipped: int

    def scaled(self, p: ModelParams):
        return -p.a * self.x0, -p.bsc * self.y0 / p.a


def nodal_lines_sample(p: ModelParams, t0: float, t1: float, dt: float) -> NodalSample:
    """Nodal positions at t0, t0+dt, ..., <= t1, skipping times where the node
    is at infinity."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if p.a == 0 or p.b == 0:
        raise ValueError("nodal lines require a != 0 and b != 0")
    n = int(math.floor((t1 - t0) / dt + 1e-9)) + 1
    t = t0 + dt * np.arange(n)
    S = np.sin((1 + p.c) * t)
    s = np.sin(p.c * t)
    good = (np.abs(S) >= TOL_DIV) & (np.abs(s) >= TOL_DIV)
    t = t[good]
    S, s = S[good], s[good]
    x0 = -S / (p.a * s)
    y0 = -p.a * np.sin(t) / (p.bsc * S)
    return NodalSample(t, x0, y0, int(n - good.sum()))
