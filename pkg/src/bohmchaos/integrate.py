"""Adaptive integration of the guidance equation, with optional variational
(deviation-vector) dynamics and finite-time Lyapunov numbers."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .errors import NearNode, StepUnderflow, NumericalError
from .field import ModelParams, eval_G, G_FLOOR

log = logging.getLogger(__name__)

DT_OUT = 0.1
H_MAX = 1e-2
DEFAULT_TOL = 1e-12
MAX_STEPS = 200_000_000


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered samples of an orbit.

    When deviations are carried, ``dx, dy`` hold the (possibly renormalised)
    deviation vector and ``log_scale`` the accumulated log of the factors
    divided out, so that ln|xi(t)| = log_scale + ln|(dx, dy)|.
    """
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dx: Optional[np.ndarray] = None
    dy: Optional[np.ndarray] = None
    log_scale: Optional[np.ndarray] = None
    tol: float = DEFAULT_TOL
    stats: dict = field(default_factory=dict)

    @property
    def has_deviation(self) -> bool:
        return self.dx is not None

    def log_xi(self) -> np.ndarray:
        if not self.has_deviation:
            raise ValueError("trajectory carries no deviation vector")
        return self.log_scale + np.log(np.hypot(self.dx, self.dy))

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class LyapunovRecord:
    t: float
    chi: float
    log_norm_accum: float


def _check_inputs(p, x0, y0, tol):
    if not (1e-13 <= tol <= 1e-6):
        raise ValueError(f"tol must lie in [1e-13, 1e-6], got {tol!r}")
    if not eval_G(p, x0, y0, 0.0) > G_FLOOR:
        raise NearNode("initial point on the nodal set", t=0.0)
    if p.rational_c_warning:
        log.warning("c=%r is (nearly) rational: orbits are periodic and the integration "
                    "is stiff near the X-point; double precision results are unreliable", p.c)


def _run(p, z0, t_end, tol, dt_out, hmax, deviation):
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if dt_out <= 0:
        raise ValueError("dt_out must be positive")
    prm = np.array([p.a, p.bsc, p.c])
    rhs = K.rhs_orbit_dev if deviation else K.rhs_orbit
    t, y, ls, n, status, stats = K.dopri5(
        rhs, K.never_stop, 0.0, np.asarray(z0, dtype=float), float(t_end), prm,
        tol, tol, hmax, dt_out, MAX_STEPS, 2, True)
    info = {
        "accepted": int(stats[0]), "rejected": int(stats[1]),
        "near_node_rejections": int(stats[2]),
        "h_min": float(stats[3]), "h_max": float(stats[4]),
    }
    if status == K.NEAR_NODE:
        raise NearNode("step control could not keep G above floor", t=float(stats[5]))
    if status == K.STEP_UNDERFLOW:
        raise StepUnderflow(float(stats[5]), float(stats[3]))
    if status == K.MAX_STEPS:
        raise NumericalError(f"step budget exhausted at t={stats[5]:.6g}")
    return t[:n], y[:n], ls[:n], info


def integrate_orbit(p: ModelParams, x0: float, y0: float, t_end: float,
                    tol: float = DEFAULT_TOL, dt_out: float = DT_OUT,
                    hmax: float = H_MAX) -> Trajectory:
    """Integrate the guidance equation from (x0, y0) at t = 0 to t_end.

    Dormand-Prince 5(4) with PI step control, steps capped at ``hmax`` and
    samples every ``dt_out`` from the continuous extension. Deterministic:
    identical inputs give bit-identical samples.
    """
    _check_inputs(p, x0, y0, tol)
    t, y, _, info = _run(p, [x0, y0], t_end, tol, dt_out, hmax, deviation=False)
    return Trajectory(t, y[:, 0].copy(), y[:, 1].copy(), tol=tol, stats=info)


def integrate_with_deviation(p: ModelParams, x0: float, y0: float, dx0: float, dy0: float,
                             t_end: float, tol: float = DEFAULT_TOL,
                             dt_out: float = DT_OUT, hmax: float = H_MAX) -> Trajectory:
    """As integrate_orbit, also evolving a deviation vector with the analytic
    Jacobian of the field (variational equations)."""
    if dx0 == 0 and dy0 == 0:
        raise ValueError("initial deviation must be non-zero")
    _check_inputs(p, x0, y0, tol)
    t, y, ls, info = _run(p, [x0, y0, dx0, dy0], t_end, tol, dt_out, hmax, deviation=True)
    return Trajectory(t, y[:, 0].copy(), y[:, 1].copy(), y[:, 2].copy(), y[:, 3].copy(),
                      ls, tol=tol, stats=info)


def chi_series(traj: Trajectory):
    """(t, chi) with chi(t) = ln(|xi(t)|/|xi(0)|)/t for every sample with t > 0."""
    lx = traj.log_xi()
    rel = lx - lx[0]
    mask = traj.t > 0
    return traj.t[mask], rel[mask] / traj.t[mask]


def finite_time_lcn(traj: Trajectory, dt_window: float = DT_OUT) -> list[LyapunovRecord]:
    """Finite-time Lyapunov characteristic number at the window boundaries
    t = k * dt_window (k >= 1) present in the trajectory samples."""
    lx = traj.log_xi()
    rel = lx - lx[0]
    k = traj.t / dt_window
    on_grid = (np.abs(k - np.round(k)) < 1e-6) & (traj.t > 0)
    return [LyapunovRecord(float(t), float(r / t), float(r))
            for t, r in zip(traj.t[on_grid], rel[on_grid])]


def pair_separation(p: ModelParams, init1, init2, t_end: float,
                    tol: float = DEFAULT_TOL, dt_out: float = DT_OUT):
    """Distance between two orbits on a shared output grid; returns (t, dS)."""
    o1 = integrate_orbit(p, init1[0], init1[1], t_end, tol, dt_out)
    o2 = integrate_orbit(p, init2[0], init2[1], t_end, tol, dt_out)
    return o1.t, np.hypot(o1.x - o2.x, o1.y - o2.y)


def orbit_bounding_box(traj: Trajectory):
    return (float(traj.x.min()), float(traj.x.max()), float(traj.y.min()), float(traj.y.max()))


__all__ = [
    "Trajectory", "LyapunovRecord", "integrate_orbit", "integrate_with_deviation",
    "chi_series", "finite_time_lcn", "pair_separation", "orbit_bounding_box",
    "DT_OUT", "H_MAX", "DEFAULT_TOL",
]
