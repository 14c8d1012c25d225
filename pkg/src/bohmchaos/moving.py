"""Dynamics in the frame co-moving with the nodal point.

With u = x - x0(t), v = y - y0(t) the field is the rest-frame velocity at the
shifted point minus the nodal velocity. Freezing t at t0 gives a planar flow
with a centre-like node at the origin and a saddle (the X-point); the sign of
the averaged cubic radial coefficient decides whether the node attracts or
repels nearby orbits.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import _kernels as K
from .errors import DegenerateSaddle, DomainExceeded, NearNode, NoConvergence, NodalAtInfinity
from .field import ModelParams, TOL_DIV, jacobian, nodal_point, velocity

log = logging.getLogger(__name__)

N_QUAD = 2048
XPOINT_TOL = 1e-12
XPOINT_MAX_ITER = 50
EIG_FLOOR = 1e-10
TRACE_OFFSET = 1e-4
HOPF_STEP = 1e-2
ROOT_TOL = 1e-9
CYCLE_TOL = 1e-8


@dataclass(frozen=True)
class MovingState:
    u: float
    v: float
    t: float

    @property
    def R(self) -> float:
        return math.hypot(self.u, self.v)

    @property
    def phi(self) -> float:
        return math.atan2(self.v, self.u)

    @classmethod
    def from_rest(cls, p: ModelParams, x, y, t):
        nf = nodal_point(p, t)
        return cls(x - nf.x0, y - nf.y0, t)


def moving_frame_field(p: ModelParams, u, v, t):
    """(du/dt, dv/dt) in the co-moving frame at time t."""
    nf = nodal_point(p, t)
    vx, vy = velocity(p, nf.x0 + u, nf.y0 + v, t)
    return vx - nf.x0dot, vy - nf.y0dot


def moving_frame_jacobian(p: ModelParams, u, v, t):
    """Jacobian of the co-moving field; the frame shift does not change it."""
    nf = nodal_point(p, t)
    return jacobian(p, nf.x0 + u, nf.y0 + v, t)


def g_parts(p: ModelParams, u, v, t):
    """Quadratic, cubic and quartic parts (in u, v) of G about the nodal point."""
    nf = nodal_point(p, t)
    x0, bsc = nf.x0, p.bsc
    C = math.cos((1 + p.c) * t)
    G2 = u * u / x0 ** 2 - 2 * bsc * u * v * C + bsc ** 2 * x0 ** 2 * v * v
    G3 = -2 * bsc / x0 * u * u * v * C + 2 * bsc ** 2 * x0 * u * v * v
    G4 = bsc ** 2 * u * u * v * v
    return G2, G3, G4


def _angular_g(p, phi, t0, x0):
    bsc = p.bsc
    C = math.cos((1 + p.c) * t0)
    cp, sp = np.cos(phi), np.sin(phi)
    g2 = cp * cp / x0 ** 2 - 2 * bsc * sp * cp * C + bsc ** 2 * x0 ** 2 * sp * sp
    g3 = -2 * bsc / x0 * C * cp * cp * sp + 2 * bsc ** 2 * x0 * cp * sp * sp
    g4 = bsc ** 2 * cp * cp * sp * sp
    return g2, g3, g4


def adiabatic_denominator(p: ModelParams, phi, t0: float):
    """Angular factor of the quadratic part of G; positive for every phi."""
    nf = nodal_point(p, t0)
    return _angular_g(p, np.asarray(phi, dtype=float), t0, nf.x0)[0]


def adiabatic_phi_rate(p: ModelParams, phi, t0: float):
    """Leading-order angular velocity around the node in the rescaled time
    t' = (t - t0)/R0^2. Its sign is that of sin((1+c)t0) for every phi."""
    return p.bsc * math.sin((1 + p.c) * t0) / adiabatic_denominator(p, phi, t0)


def _radial_pieces(p, phi, t0):
    nf = nodal_point(p, t0)
    S = math.sin((1 + p.c) * t0)
    if abs(S) < TOL_DIV:
        raise NodalAtInfinity(t0)
    ab_s = p.a * p.bsc * math.sin(p.c * t0)
    cp, sp = np.cos(phi), np.sin(phi)
    A = ab_s * cp * cp * sp
    C = ab_s * cp ** 3
    B = p.bsc * S
    g2, g3, _ = _angular_g(p, phi, t0, nf.x0)
    return nf, A, B, C, g2, g3, cp, sp


def f2_integrand(p: ModelParams, phi, t0: float):
    """Coefficient of R^2 in the small-R expansion of dR/dphi."""
    nf, A, B, C, g2, g3, cp, sp = _radial_pieces(p, np.asarray(phi, dtype=float), t0)
    return (-A - nf.x0dot * g2 * cp - nf.y0dot * g2 * sp) / B


def f3_integrand(p: ModelParams, phi, t0: float):
    """Coefficient of R^3 in the small-R expansion of dR/dphi."""
    nf, A, B, C, g2, g3, cp, sp = _radial_pieces(p, np.asarray(phi, dtype=float), t0)
    xd, yd = nf.x0dot, nf.y0dot
    lead = (-A - xd * g2 * cp - yd * g2 * sp) / B
    return lead * (C / B + yd * g2 * cp / B - xd * g2 * sp / B) + (-xd * g3 * cp - yd * g3 * sp) / B


def f_means_quadrature(p: ModelParams, t0: float, n: int = N_QUAD):
    """(<f2>, <f3>) by the periodic trapezoid rule on n points."""
    phi = 2 * math.pi * np.arange(n) / n
    return float(np.mean(f2_integrand(p, phi, t0))), float(np.mean(f3_integrand(p, phi, t0)))


def f3_mean(p: ModelParams, t0: float) -> float:
    """Closed form of the phi-average of the cubic radial coefficient."""
    nf = nodal_point(p, t0)
    c, bsc, a = p.c, p.bsc, p.a
    S = math.sin((1 + c) * t0)
    C = math.cos((1 + c) * t0)
    s = math.sin(c * t0)
    x0, xd, yd = nf.x0, nf.x0dot, nf.y0dot
    num = (C * S * bsc ** 2 * x0 ** 3 * yd
           + a * bsc ** 2 * s * x0 ** 4 * C * yd
           - (bsc * x0 ** 2 + bsc ** 3 * x0 ** 6) * C * (xd * xd - yd * yd)
           - S * bsc ** 3 * x0 ** 5 * xd
           - a * bsc * s * x0 ** 2 * xd
           + (bsc ** 4 * x0 ** 8 - 1) * xd * yd)
    return num / (4 * S * S * bsc * bsc * x0 ** 4)


def node_character(p: ModelParams, t0: float) -> str:
    """'attractor' or 'repellor' for forward time at frozen t0.

    Orbits spiral in when the averaged cubic coefficient and the rotation
    sense sin((1+c)t0) have opposite signs.
    """
    f3 = f3_mean(p, t0)
    S = math.sin((1 + p.c) * t0)
    return "attractor" if f3 * S < 0 else "repellor"


def spiral_radius(R0: float, phi0: float, phi, f3: float):
    """Solution of dR/dphi = f3 R^3 through (phi0, R0)."""
    arg = 1 - 2 * R0 * R0 * f3 * (np.asarray(phi, dtype=float) - phi0)
    if np.any(arg <= 0):
        raise DomainExceeded("spiral left its domain of validity (1 - 2 R0^2 f3 (phi - phi0) <= 0)")
    out = R0 / np.sqrt(arg)
    return float(out) if np.ndim(out) == 0 else out


# X-point

@dataclass(frozen=True)
class XPoint:
    t0: float
    u0: float
    v0: float
    lambda_plus: float
    lambda_minus: float
    eigvec_plus: np.ndarray
    eigvec_minus: np.ndarray
    d0: float
    residual: float
    jacobian: np.ndarray = field(repr=False)
    seed: str = "leading"

    @property
    def asymmetry(self) -> float:
        J = self.jacobian
        return abs(J[0, 1] - J[1, 0]) / max(abs(J[0, 1]), abs(J[1, 0]), 1e-300)


_SEEDS = {0: "previous", 1: "leading", 2: "closed-form", 3: "axis", 4: "ring"}


def _frozen_prm(p, t0):
    ok, prm = K.frozen_prm(float(t0), p.a, p.bsc, p.c)
    if not ok:
        raise NodalAtInfinity(t0)
    return prm


def frozen_field(p: ModelParams, t0: float, u, v):
    """Co-moving field with t frozen at t0, evaluated in node-centred form
    (accurate close to the node). Broadcasts over u, v."""
    prm = _frozen_prm(p, t0)
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    du = np.empty(u.shape)
    dv = np.empty(u.shape)
    for idx in np.ndindex(u.shape):
        fu, fv, G = K.frozen_field(u[idx], v[idx], prm)
        if not G > 0:
            raise NearNode("frozen field evaluated at the node", t=t0)
        du[idx], dv[idx] = fu, fv
    if du.ndim == 0:
        return float(du), float(dv)
    return du, dv


def frozen_jacobian(p: ModelParams, t0: float, u: float, v: float) -> np.ndarray:
    prm = _frozen_prm(p, t0)
    _, _, j11, j12, j21, j22, G = K.moving_velocity_jacobian(float(u), float(v), prm)
    if not G > 0:
        raise NearNode("frozen Jacobian evaluated at the node", t=t0)
    return np.array([[j11, j12], [j21, j22]])


def xpoint_locate(p: ModelParams, t0: float, tol: float = XPOINT_TOL) -> XPoint:
    """Saddle of the frozen co-moving field at t0, refined by Newton."""
    if p.a == 0 or p.b == 0:
        raise ValueError("X-point requires a != 0 and b != 0")
    prm = _frozen_prm(p, t0)
    ok, u, v, res, kind = K.xpoint_solve(prm, 0.0, 0.0, False, tol, XPOINT_MAX_ITER)
    if not ok:
        raise NoConvergence(f"no saddle found at t0={t0} (best residual {res:.3e})")
    J = frozen_jacobian(p, t0, u, v)
    Js = 0.5 * (J + J.T)
    w, V = np.linalg.eigh(Js)
    if min(abs(w)) < EIG_FLOOR:
        raise DegenerateSaddle(f"eigenvalue {min(abs(w), key=abs):.3e} at t0={t0}")
    i_plus = int(np.argmax(w))
    return XPoint(float(t0), float(u), float(v), float(w[i_plus]), float(w[1 - i_plus]),
                  V[:, i_plus].copy(), V[:, 1 - i_plus].copy(), math.hypot(u, v), float(res),
                  J, _SEEDS[int(kind)])


def xpoint_sweep(p: ModelParams, t0s):
    """X-points at many times; times where the node is at infinity or no
    saddle is found are skipped and returned separately."""
    found, failed = [], []
    for t0 in np.asarray(t0s, dtype=float):
        try:
            found.append(xpoint_locate(p, t0))
        except (NodalAtInfinity, NoConvergence, DegenerateSaddle) as exc:
            failed.append((float(t0), type(exc).__name__))
    return found, failed


def xpoint_track(p: ModelParams, ts, tol: float = 1e-10):
    """Absolute X-point and node positions along a dense time grid.

    Returns (xp, yp, xn, yn, ok); entries are nan where ok is False.
    """
    ts = np.ascontiguousarray(ts, dtype=float)
    return K.xpoint_track(ts, p.a, p.bsc, p.c, tol, XPOINT_MAX_ITER)


# flow charts

class Branch(NamedTuple):
    kind: str          # "stable" or "unstable"
    side: int          # +1 / -1 along the eigenvector
    points: np.ndarray  # (n, 2) in (u, v)
    winding: float     # net turns around the node
    escaped: bool
    captured: bool


@dataclass(frozen=True)
class FlowChart:
    t0: float
    xpoint: XPoint
    branches: tuple
    spiral_index: int
    node: str
    f3: float

    @property
    def spiral_branch(self) -> Branch:
        return self.branches[self.spiral_index]

    @property
    def spiral_kind(self) -> str:
        return self.spiral_branch.kind


def _trace(p, prm, start, direction, length, ds, r_capture, r_escape):
    q = prm.copy()
    q[8] = direction
    q[9] = r_capture
    q[10] = r_escape
    t, y, _, n, status, stats = K.dopri5(
        K.rhs_arclength, K.stop_trace, 0.0, np.asarray(start, dtype=float), float(length), q,
        1e-10, 1e-12, ds, ds, 10_000_000, 2, False)
    pts = y[:n]
    if status in (K.NEAR_NODE, K.STEP_UNDERFLOW):
        log.info("branch trace stopped at a singular point after arc length %.3g", stats[5])
    r_end = math.hypot(pts[-1, 0], pts[-1, 1])
    return pts, status == K.STOPPED and r_end > r_escape * 0.999, (
        status == K.STOPPED and r_end < r_capture * 1.001) or status == K.NEAR_NODE


def _winding(pts):
    ang = np.unwrap(np.arctan2(pts[:, 1], pts[:, 0]))
    return float((ang[-1] - ang[0]) / (2 * math.pi))


def flow_chart(p: ModelParams, t0: float, length_factor: float = 60.0,
               window_factor: float = 4.0) -> FlowChart:
    """Trace the four invariant-manifold branches of the X-point at frozen t0.

    Each branch starts TRACE_OFFSET from the X-point along an eigenvector;
    unstable branches are followed forward, stable ones backward, by
    arc length. The branch that winds most around the node (at least two
    turns) is the one joined to the nodal spiral.
    """
    xp = xpoint_locate(p, t0)
    prm = _frozen_prm(p, t0)
    d0 = xp.d0
    length = length_factor * d0
    ds = d0 / 200
    r_capture = 1e-3 * d0
    r_escape = window_factor * d0
    branches = []
    for kind, vec, direction in (("unstable", xp.eigvec_plus, 1.0), ("stable", xp.eigvec_minus, -1.0)):
        for side in (1, -1):
            start = np.array([xp.u0, xp.v0]) + side * TRACE_OFFSET * vec
            pts, escaped, captured = _trace(p, prm, start, direction, length, ds, r_capture, r_escape)
            branches.append(Branch(kind, side, pts, _winding(pts), escaped, captured))
    turns = [abs(b.winding) if not b.escaped else 0.0 for b in branches]
    idx = int(np.argmax(turns))
    if turns[idx] < 2.0:
        log.warning("no branch winds around the node at t0=%g (max %.2f turns)", t0, turns[idx])
        idx = -1
    return FlowChart(float(t0), xp, tuple(branches), idx, node_character(p, t0), f3_mean(p, t0))


# Hopf scan

class HopfEvent(NamedTuple):
    t: float
    kind: str   # "f3_zero" or "collision"


def collision_times(p: ModelParams, t_lo: float, t_hi: float):
    """Roots k pi/(1+c) of sin((1+c)t) in [t_lo, t_hi]."""
    w = 1 + p.c
    k = np.arange(math.ceil(t_lo * w / math.pi), math.floor(t_hi * w / math.pi) + 1)
    return [float(kk * math.pi / w) for kk in k]


def hopf_scan(p: ModelParams, t_lo: float, t_hi: float, step: float = HOPF_STEP):
    """Zeros of the averaged cubic coefficient and node-X-point collisions in
    [t_lo, t_hi], ordered in time.

    Sign changes across a pole (sin(ct) or sin((1+c)t) vanishing inside the
    bracket) are not zeros and are skipped.
    """
    if not t_lo < t_hi:
        raise ValueError("need t_lo < t_hi")
    n = max(2, int(math.ceil((t_hi - t_lo) / step)) + 1)
    grid = np.linspace(t_lo, t_hi, n)
    c = p.c

    def f(t):
        try:
            return f3_mean(p, t)
        except NodalAtInfinity:
            return math.nan

    vals = np.array([f(t) for t in grid])
    events = [HopfEvent(t, "collision") for t in collision_times(p, t_lo, t_hi)]
    for i in range(n - 1):
        t1, t2 = grid[i], grid[i + 1]
        f1, f2 = vals[i], vals[i + 1]
        if not (math.isfinite(f1) and math.isfinite(f2)) or f1 * f2 > 0:
            continue
        if f1 == 0:
            events.append(HopfEvent(float(t1), "f3_zero"))
            continue
        if f2 == 0:
            continue
        pole = False
        for w in (c, 1 + c):
            if math.floor(t1 * w / math.pi) != math.floor(t2 * w / math.pi):
                pole = True
        if pole:
            continue
        root = brentq(f, t1, t2, xtol=ROOT_TOL, rtol=4 * np.finfo(float).eps)
        events.append(HopfEvent(float(root), "f3_zero"))
    events.sort(key=lambda e: e.t)
    return events


# limit cycles

@dataclass(frozen=True)
class LimitCycle:
    t0: float
    radius: float          # crossing radius on the phi = 0 ray
    d0: float
    drift_profile: tuple   # (radius, drift or nan when the revolution does not close)


def _revolution_drift(p, prm, R0, sense):
    """Radius change after one revolution around the node starting at (R0, 0),
    following the flow forward in time. nan when the angular velocity changes
    sign (the orbit leaves the neighbourhood of the node)."""

    def rates(R, phi):
        u, v = R * math.cos(phi), R * math.sin(phi)
        du, dv, G = K.frozen_field(u, v, prm)
        if not G > 0:
            raise NearNode("frozen trace hit the node", t=prm[3])
        dR = (u * du + v * dv) / R
        dphi = (u * dv - v * du) / (R * R)
        return dR, dphi

    def rhs(phi, y):
        dR, dphi = rates(y[0], phi)
        return [dR / dphi]

    def turn(phi, y):
        return rates(y[0], phi)[1] * sense
    turn.terminal = True

    span = 2 * math.pi * sense
    sol = solve_ivp(rhs, (0.0, span), [R0], method="DOP853", rtol=1e-11, atol=1e-13,
                    events=turn)
    if sol.status == 1 or not sol.success:
        return math.nan
    return float(sol.y[0, -1] - R0)


def limit_cycle_find(p: ModelParams, t0: float, r_lo: Optional[float] = None,
                     r_hi: Optional[float] = None, n_grid: int = 25) -> Optional[LimitCycle]:
    """Closed orbit of the frozen field between the node and the X-point.

    The radial drift per revolution is sampled on a grid of starting radii
    along the phi = 0 ray. A cycle exists when two neighbouring radii that
    both complete a revolution have drifts of opposite sign; its radius is
    then bisected to CYCLE_TOL. Returns None when there is no such change.
    """
    xp = xpoint_locate(p, t0)
    prm = _frozen_prm(p, t0)
    sense = 1.0 if math.sin((1 + p.c) * t0) > 0 else -1.0
    r_lo = 0.02 * xp.d0 if r_lo is None else r_lo
    r_hi = 0.98 * xp.d0 if r_hi is None else r_hi
    radii = np.linspace(r_lo, r_hi, n_grid)
    drifts = np.array([_revolution_drift(p, prm, R, sense) for R in radii])
    profile = tuple(zip(radii.tolist(), drifts.tolist()))
    for i in range(n_grid - 1):
        d1, d2 = drifts[i], drifts[i + 1]
        if math.isfinite(d1) and math.isfinite(d2) and d1 * d2 < 0:
            lo, hi = radii[i], radii[i + 1]
            while hi - lo > CYCLE_TOL:
                mid = 0.5 * (lo + hi)
                dm = _revolution_drift(p, prm, mid, sense)
                if not math.isfinite(dm):
                    break
                if (dm < 0) == (d1 < 0):
                    lo = mid
                else:
                    hi = mid
            return LimitCycle(float(t0), 0.5 * (lo + hi), xp.d0, profile)
    return None


__all__ = [
    "MovingState", "moving_frame_field", "moving_frame_jacobian", "g_parts",
    "adiabatic_denominator", "adiabatic_phi_rate", "f2_integrand", "f3_integrand",
    "f_means_quadrature", "f3_mean", "node_character", "spiral_radius", "XPoint",
    "frozen_field", "frozen_jacobian", "xpoint_locate", "xpoint_sweep", "xpoint_track", "Branch", "FlowChart",
    "flow_chart", "HopfEvent", "collision_times", "hopf_scan", "LimitCycle", "limit_cycle_find",
]
