"""Wavefunction, guidance velocity field and nodal point of the three-state
superposition in the anisotropic 2D harmonic well.

The wavefunction is

    psi = exp(-(x^2 + c y^2)/2 - i(1+c)t/2) * (1 + a x e^{-it} + b sqrt(c) x y e^{-i(1+c)t})

with hbar = 1. Everything here is a pure function of its arguments and
broadcasts over numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import NearNode, NodalAtInfinity

G_FLOOR = 1e-12
TOL_DIV = 1e-12


@dataclass(frozen=True)
class ModelParams:
    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c!r}")

    @property
    def sqrt_c(self) -> float:
        return math.sqrt(self.c)

    @property
    def bsc(self) -> float:
        """b * sqrt(c), the coefficient that appears everywhere."""
        return self.b * math.sqrt(self.c)

    @property
    def rational_c_warning(self) -> bool:
        """True when c is within 1e-9 of p/q with q <= 64.

        Commensurable frequencies make the orbits periodic and the equations
        stiff near the X-point; double precision is not enough to resolve them.
        """
        approx = Fraction(self.c).limit_denominator(64)
        return abs(self.c - approx.numerator / approx.denominator) < 1e-9

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.sqrt_c])


class PhaseState(NamedTuple):
    x: float
    y: float
    t: float


class Velocity2(NamedTuple):
    vx: float
    vy: float


@dataclass(frozen=True)
class NodalFrame:
    t: float
    x0: float
    y0: float
    x0dot: float
    y0dot: float


def _polynomial(p, x, y, t):
    """The bracketed factor 1 + a x e^{-it} + b sqrt(c) x y e^{-i(1+c)t}."""
    return 1 + p.a * x * np.exp(-1j * t) + p.bsc * x * y * np.exp(-1j * (1 + p.c) * t)


def eval_psi(p: ModelParams, x, y, t):
    envelope = np.exp(-(x * x + p.c * y * y) / 2 - 1j * (1 + p.c) * t / 2)
    return envelope * _polynomial(p, x, y, t)


def eval_G(p: ModelParams, x, y, t):
    """Squared modulus of the polynomial factor of psi, written out in real form."""
    a, bsc, c = p.a, p.bsc, p.c
    return (1 + 2 * a * x * np.cos(t) + 2 * bsc * x * y * np.cos((1 + c) * t)
            + a * a * x * x + 2 * a * bsc * x * x * y * np.cos(c * t)
            + bsc * bsc * x * x * y * y)


def _grad_G(p, x, y, t):
    a, bsc, c = p.a, p.bsc, p.c
    gx = (2 * a * np.cos(t) + 2 * bsc * y * np.cos((1 + c) * t) + 2 * a * a * x
          + 4 * a * bsc * x * y * np.cos(c * t) + 2 * bsc * bsc * x * y * y)
    gy = 2 * bsc * x * np.cos((1 + c) * t) + 2 * a * bsc * x * x * np.cos(c * t) + 2 * bsc * bsc * x * x * y
    return gx, gy


def _numerators(p, x, y, t):
    a, bsc, c = p.a, p.bsc, p.c
    nx = a * np.sin(t) + bsc * y * np.sin((1 + c) * t)
    ny = bsc * x * (a * x * np.sin(c * t) + np.sin((1 + c) * t))
    return nx, ny


def _check_floor(G, t):
    if np.any(np.asarray(G) <= G_FLOOR):
        raise NearNode(f"G={np.min(G):.3e} <= g_floor={G_FLOOR:g}", t=t)


def velocity(p: ModelParams, x, y, t) -> Velocity2:
    """Bohmian guidance velocity (dx/dt, dy/dt) = Im(grad psi / psi).

    Raises NearNode when G <= G_FLOOR anywhere in the input.
    """
    G = eval_G(p, x, y, t)
    _check_floor(G, t)
    nx, ny = _numerators(p, x, y, t)
    return Velocity2(-nx / G, -ny / G)


def jacobian(p: ModelParams, x, y, t) -> np.ndarray:
    """Analytic Jacobian d(vx, vy)/d(x, y); shape (..., 2, 2)."""
    a, bsc, c = p.a, p.bsc, p.c
    G = eval_G(p, x, y, t)
    _check_floor(G, t)
    nx, ny = _numerators(p, x, y, t)
    gx, gy = _grad_G(p, x, y, t)
    S = np.sin((1 + c) * t)
    G2 = G * G
    j11 = nx * gx / G2
    j12 = -bsc * S / G + nx * gy / G2
    j21 = -(2 * a * bsc * x * np.sin(c * t) + bsc * S) / G + ny * gx / G2
    j22 = ny * gy / G2
    return np.stack([np.stack([j11, j12], -1), np.stack([j21, j22], -1)], -2)


def psi_gradient(p: ModelParams, x, y, t):
    """Analytic complex gradient (dpsi/dx, dpsi/dy)."""
    psi = eval_psi(p, x, y, t)
    envelope = np.exp(-(x * x + p.c * y * y) / 2 - 1j * (1 + p.c) * t / 2)
    e1 = np.exp(-1j * t)
    e2 = np.exp(-1j * (1 + p.c) * t)
    dpoly_dx = p.a * e1 + p.bsc * y * e2
    dpoly_dy = p.bsc * x * e2
    return -x * psi + envelope * dpoly_dx, -p.c * y * psi + envelope * dpoly_dy


def nodal_point(p: ModelParams, t: float) -> NodalFrame:
    """Position and velocity of the single nodal point at time t."""
    if p.a == 0 or p.b == 0:
        raise ValueError("nodal point requires a != 0 and b != 0")
    c = p.c
    S, dS = math.sin((1 + c) * t), (1 + c) * math.cos((1 + c) * t)
    s, ds = math.sin(c * t), c * math.cos(c * t)
    st, dst = math.sin(t), math.cos(t)
    if abs(s) < TOL_DIV or abs(S) < TOL_DIV:
        raise NodalAtInfinity(t)
    x0 = -S / (p.a * s)
    y0 = -p.a * st / (p.bsc * S)
    x0dot = -(dS * s - S * ds) / (p.a * s * s)
    y0dot = -p.a * (dst * S - st * dS) / (p.bsc * S * S)
    return NodalFrame(t, x0, y0, x0dot, y0dot)


def nodal_points(p: ModelParams, t):
    """Vectorised nodal positions; entries at divergent times are nan."""
    t = np.asarray(t, dtype=float)
    S = np.sin((1 + p.c) * t)
    s = np.sin(p.c * t)
    bad = (np.abs(S) < TOL_DIV) | (np.abs(s) < TOL_DIV)
    with np.errstate(divide="ignore", invalid="ignore"):
        x0 = np.where(bad, np.nan, -S / (p.a * s))
        y0 = np.where(bad, np.nan, -p.a * np.sin(t) / (p.bsc * S))
    return x0, y0


def rest_frame_stream(p: ModelParams, x, y, t):
    """Frozen-time stream function C(x, y); its level sets are the rest-frame
    integral curves of the velocity field at fixed t."""
    a, bsc, c = p.a, p.bsc, p.c
    S = np.sin((1 + c) * t)
    return (a * np.sin(t) * y + bsc * S * y * y / 2
            - a * bsc * np.sin(c * t) * x ** 3 / 3 - bsc * S * x * x / 2)


def rest_frame_stream_gradient(p: ModelParams, x, y, t):
    a, bsc, c = p.a, p.bsc, p.c
    S = np.sin((1 + c) * t)
    return -a * bsc * np.sin(c * t) * x * x - bsc * S * x, a * np.sin(t) + bsc * S * y


@dataclass(frozen=True)
class CriticalPoint:
    x: float
    y: float
    eigenvalues: tuple


def rest_frame_critical_points(p: ModelParams, t: float):
    """The two critical points of C at frozen t.

    The first coincides with the nodal point and is a centre; the second,
    (0, y0), is a saddle. Eigenvalues are those of the linearised level-set
    flow (dC/dy, -dC/dx): +-i b sqrt(c) sin((1+c)t) and +-b sqrt(c) sin((1+c)t).
    """
    nf = nodal_point(p, t)
    a, bsc, c = p.a, p.bsc, p.c
    out = []
    for x in (nf.x0, 0.0):
        hxx = -2 * a * bsc * math.sin(c * t) * x - bsc * math.sin((1 + c) * t)
        hyy = bsc * math.sin((1 + c) * t)
        # C has no mixed second derivative
        flow = np.array([[0.0, hyy], [-hxx, 0.0]])
        ev = np.linalg.eigvals(flow).astype(complex)
        out.append(CriticalPoint(x, nf.y0, tuple(sorted(ev, key=lambda z: (z.imag, z.real)))))
    return out[0], out[1]
