"""Order-by-order trigonometric series for regular orbits.

x(t) = x0 + x1(t) + x2(t) + ..., with x_n of total degree n in the amplitudes
(a, b). Every x_n, y_n is a finite sum of cos((m1 + m2 c) t) terms with
x_n(0) = y_n(0) = 0.

Internally a trigonometric polynomial is a complex array F over the
frequency lattice, f(t) = sum_k F[k] exp(i (k1 + k2 c) t), so that products
of series are 2D convolutions (the cos*cos and sin*cos product rules) and
cosine/sine parts are the real/imaginary parts of F.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.signal import convolve2d

from .errors import NumericalError
from .field import ModelParams, velocity

log = logging.getLogger(__name__)

FREQ_FLOOR = 1e-12
PRUNE_REL = 1e-16
COS_LEAK_TOL = 1e-9


class TrigTerm(NamedTuple):
    m1: int
    m2: int
    coeff: float

    def frequency(self, c: float) -> float:
        return self.m1 + self.m2 * c


class ResonanceDropped(NamedTuple):
    order: int
    axis: str
    m1: int
    m2: int
    coeff: float


@dataclass(frozen=True)
class TrigSeries:
    """One coordinate of a series solution.

    ``orders[n-1]`` holds the cosine terms of the order-n contribution; the
    constant (0, 0) term of each order is the integration constant that makes
    it vanish at t = 0.
    """
    axis: str
    initial: float
    params: ModelParams
    orders: tuple
    resonances: tuple = ()
    max_cos_leak: float = 0.0

    @property
    def order(self) -> int:
        return len(self.orders)

    def terms(self, order: int) -> tuple:
        return self.orders[order - 1]

    def coefficient(self, order: int, m1: int, m2: int) -> float:
        for term in self.orders[order - 1]:
            if term.m1 == m1 and term.m2 == m2:
                return term.coeff
        return 0.0

    def frequencies(self) -> set:
        return {(tm.m1, tm.m2) for terms in self.orders for tm in terms}

    def __call__(self, t, max_order=None):
        return series_eval(self, t, max_order)


def _canonical(m1, m2):
    return m1 > 0 or (m1 == 0 and m2 > 0)


class _Lattice:
    """Frequency lattice |m1|, |m2| <= M with helpers to build and read arrays."""

    def __init__(self, M: int, c: float):
        self.M = M
        self.c = c
        k = np.arange(-M, M + 1)
        self.m1, self.m2 = np.meshgrid(k, k, indexing="ij")
        self.omega = self.m1 + self.m2 * c

    def zeros(self):
        return np.zeros((2 * self.M + 1, 2 * self.M + 1), dtype=complex)

    def const(self, value):
        F = self.zeros()
        F[self.M, self.M] = value
        return F

    def cos(self, m1, m2, coeff):
        F = self.zeros()
        F[self.M + m1, self.M + m2] += coeff / 2
        F[self.M - m1, self.M - m2] += coeff / 2
        return F

    def sin(self, m1, m2, coeff):
        F = self.zeros()
        F[self.M + m1, self.M + m2] += coeff / 2j
        F[self.M - m1, self.M - m2] -= coeff / 2j
        return F

    def from_terms(self, terms):
        F = self.zeros()
        for tm in terms:
            if tm.m1 == 0 and tm.m2 == 0:
                F[self.M, self.M] += tm.coeff
            else:
                F[self.M + tm.m1, self.M + tm.m2] += tm.coeff / 2
                F[self.M - tm.m1, self.M - tm.m2] += tm.coeff / 2
        return F


def _mul(A, B):
    return convolve2d(A, B, mode="same")


def _graded_mul(A, B, N):
    """Product of graded series truncated at total order N."""
    out = [None] * (N + 1)
    for n in range(N + 1):
        acc = None
        for i in range(n + 1):
            j = n - i
            if i >= len(A) or j >= len(B) or A[i] is None or B[j] is None:
                continue
            term = _mul(A[i], B[j])
            acc = term if acc is None else acc + term
        out[n] = acc
    return out


def _graded_add(*series):
    N = max(len(s) for s in series)
    out = [None] * N
    for s in series:
        for n, F in enumerate(s):
            if F is None:
                continue
            out[n] = F if out[n] is None else out[n] + F
    return out


def _graded_scale(s, k):
    return [None if F is None else k * F for F in s]


def _reciprocal_one_plus(E, N, lat):
    """Graded 1/(1 + E) for E with no order-0 part, truncated at order N.

    Equal order by order to the truncated Neumann series sum_k (-E)^k; the
    recurrence W_n = -sum_{j=1..n} E_j W_{n-j} avoids forming the powers.
    """
    W = [lat.const(1.0)] + [None] * N
    for n in range(1, N + 1):
        acc = lat.zeros()
        for j in range(1, n + 1):
            if j < len(E) and E[j] is not None and W[n - j] is not None:
                acc -= _mul(E[j], W[n - j])
        W[n] = acc
    return W


def _grade(F, n, N):
    """A graded series with a single component at order n."""
    out = [None] * (N + 1)
    if n <= N:
        out[n] = F
    return out


def series_solve(p: ModelParams, x0: float, y0: float, order: int):
    """Build the x and y series through the given perturbation order.

    Returns (sx, sy). Resonant terms (generated frequency below FREQ_FLOOR)
    are dropped and recorded on the returned series.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    N = order
    lat = _Lattice(N + 1, p.c)
    a, bsc, c = p.a, p.bsc, p.c

    cos_t = _grade(lat.cos(1, 0, a), 1, N)             # a cos t
    cos_S = _grade(lat.cos(1, 1, bsc), 1, N)           # b sqrt(c) cos((1+c)t)
    a2 = _grade(lat.const(a * a), 2, N)
    ab_cos_ct = _grade(lat.cos(0, 1, a * bsc), 2, N)   # a b sqrt(c) cos(ct)
    b2 = _grade(lat.const(bsc * bsc), 2, N)
    sin_t = _grade(lat.sin(1, 0, a), 1, N)
    sin_S = _grade(lat.sin(1, 1, bsc), 1, N)
    ab_sin_ct = _grade(lat.sin(0, 1, a * bsc), 2, N)

    X = [lat.const(x0)]
    Y = [lat.const(y0)]
    terms_x, terms_y = [], []
    resonances = []
    max_leak = 0.0

    for n in range(1, N + 1):
        # only orders < n of x, y enter the order-n velocity
        M = n
        XY = _graded_mul(X, Y, M)
        X2 = _graded_mul(X, X, M)
        X2Y = _graded_mul(X2, Y, M)
        X2Y2 = _graded_mul(X2Y, Y, M)
        E = _graded_add(
            _graded_scale(_graded_mul(cos_t, X, M), 2),
            _graded_scale(_graded_mul(cos_S, XY, M), 2),
            _graded_mul(a2, X2, M),
            _graded_scale(_graded_mul(ab_cos_ct, X2Y, M), 2),
            _graded_mul(b2, X2Y2, M),
        )
        W = _reciprocal_one_plus(E, M, lat)
        Nx = _graded_add(sin_t, _graded_mul(sin_S, Y, M))
        Ny = _graded_add(_graded_mul(sin_S, X, M), _graded_mul(ab_sin_ct, X2, M))
        Vx = _graded_mul(Nx, W, M)[n]
        Vy = _graded_mul(Ny, W, M)[n]

        new_terms = []
        for axis, V in (("x", Vx), ("y", Vy)):
            if V is None:
                V = lat.zeros()
            V = -V
            scale = float(np.max(np.abs(V))) if V.size else 0.0
            leak = float(np.max(np.abs(V.real)))
            rel_leak = leak / scale if scale > 0 else 0.0
            max_leak = max(max_leak, rel_leak)
            if rel_leak > COS_LEAK_TOL:
                raise NumericalError(
                    f"order {n} velocity for {axis} has a cosine part ({rel_leak:.2e}); "
                    "secular terms would appear")
            terms, constant = [], 0.0
            for i1, i2 in zip(*np.nonzero(np.abs(V) > 0)):
                m1, m2 = int(lat.m1[i1, i2]), int(lat.m2[i1, i2])
                if not _canonical(m1, m2):
                    continue
                s_coeff = -2 * V[i1, i2].imag          # coefficient of sin(omega t)
                omega = m1 + m2 * c
                if abs(omega) <= FREQ_FLOOR:
                    if s_coeff != 0:
                        resonances.append(ResonanceDropped(n, axis, m1, m2, s_coeff))
                        log.info("resonant term dropped at order %d (%s): (%d, %d)", n, axis, m1, m2)
                    continue
                coeff = -s_coeff / omega
                terms.append(TrigTerm(m1, m2, coeff))
                constant -= coeff
            if terms:
                cmax = max(abs(tm.coeff) for tm in terms)
                terms = [tm for tm in terms if abs(tm.coeff) >= PRUNE_REL * cmax]
                constant = -sum(tm.coeff for tm in terms)
                terms.append(TrigTerm(0, 0, constant))
            terms.sort(key=lambda tm: (tm.m1, tm.m2))
            new_terms.append(tuple(terms))
        terms_x.append(new_terms[0])
        terms_y.append(new_terms[1])
        X.append(lat.from_terms(new_terms[0]))
        Y.append(lat.from_terms(new_terms[1]))

    res = tuple(resonances)
    sx = TrigSeries("x", float(x0), p, tuple(terms_x), res, max_leak)
    sy = TrigSeries("y", float(y0), p, tuple(terms_y), res, max_leak)
    return sx, sy


def series_eval(s: TrigSeries, t, max_order=None):
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, s.initial, dtype=float)
    c = s.params.c
    for terms in s.orders[:max_order]:
        for tm in terms:
            out = out + tm.coeff * np.cos((tm.m1 + tm.m2 * c) * t)
    return out


def series_derivative(s: TrigSeries, t, max_order=None):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=float)
    c = s.params.c
    for terms in s.orders[:max_order]:
        for tm in terms:
            w = tm.m1 + tm.m2 * c
            out = out - tm.coeff * w * np.sin(w * t)
    return out


def series_residual(p: ModelParams, sx: TrigSeries, sy: TrigSeries, t_samples) -> float:
    """Max over samples of |d(series)/dt - velocity(series point)| (max-norm over x, y)."""
    t = np.asarray(t_samples, dtype=float)
    x = series_eval(sx, t)
    y = series_eval(sy, t)
    vx, vy = velocity(p, x, y, t)
    rx = np.abs(series_derivative(sx, t) - vx)
    ry = np.abs(series_derivative(sy, t) - vy)
    return float(np.max(np.maximum(rx, ry)))


def integral_of_motion_check(p: ModelParams, sx: TrigSeries, sy: TrigSeries, traj):
    """Constancy defect of x - sum_n x_n(t) = x0 along a numerical orbit.

    Returns (drift_x, drift_y), the max over samples of
    |x_num(t) - sum_n x_n(t) - x0| and the y analogue.
    """
    dx = np.abs(traj.x - series_eval(sx, traj.t))
    dy = np.abs(traj.y - series_eval(sy, traj.t))
    return float(dx.max()), float(dy.max())


def term_table(sx: TrigSeries, sy: TrigSeries):
    """Rows (order, m1, m2, coeff, axis) for both coordinates."""
    rows = []
    for s in (sx, sy):
        for n, terms in enumerate(s.orders, start=1):
            for tm in terms:
                rows.append((n, tm.m1, tm.m2, tm.coeff, s.axis))
    return rows


def closed_form_first_order(p: ModelParams, x0: float, y0: float):
    """Cosine amplitudes of the first-order solution, keyed by (m1, m2)."""
    a, bsc, c = p.a, p.bsc, p.c
    return ({(1, 0): a, (1, 1): bsc * y0 / (1 + c)},
            {(1, 1): bsc * x0 / (1 + c)})


def closed_form_second_order(p: ModelParams, x0: float, y0: float):
    a, b, bsc, c = p.a, p.b, p.bsc, p.c
    b2c = bsc * bsc
    x2 = {
        (2, 0): -a * a * x0 / 2,
        (1, 1): -b2c * x0 / (1 + c) ** 2,
        (2, 2): -b2c * x0 / (2 * (1 + c)) * (y0 * y0 - 1 / (2 * (1 + c))),
        (2, 1): -2 * a * bsc * x0 * y0 / (2 + c),
    }
    y2 = {
        (1, 1): -(a * bsc / (1 + c) + b2c * y0 / (1 + c) ** 2),
        (2, 2): -b2c * y0 / (2 * (1 + c)) * (x0 * x0 - 1 / (2 * (1 + c))),
        (0, 1): a * b / (2 * math.sqrt(c)),
        (2, 1): -a * bsc / (2 + c) * (x0 * x0 - 0.5),
    }
    return x2, y2


__all__ = [
    "TrigTerm", "TrigSeries", "ResonanceDropped", "series_solve", "series_eval",
    "series_derivative", "series_residual", "integral_of_motion_check", "term_table",
    "closed_form_first_order", "closed_form_second_order", "FREQ_FLOOR",
]

del field
