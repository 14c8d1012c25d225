"""Chaos indicators: stretching numbers, encounters with the node/X-point
complex, distance-binned averages, power-law fits and orbit classification."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateFit
from .field import ModelParams, nodal_points
from .integrate import Trajectory, chi_series
from .moving import xpoint_track

log = logging.getLogger(__name__)

WINDOW = 0.1
BIN_WIDTH = 2.5e-2
CHAOTIC_CHI = 1e-2
REGULAR_CHI = 2e-3
SLOPE_SPLIT = -0.5


class StretchWindow(NamedTuple):
    t_i: float
    a_i: float
    eps_min: float   # nan when the node is at infinity inside the window
    d_min: float     # nan when the X-point could not be found inside the window
    d0_min: float


class BinnedAverage(NamedTuple):
    bin_center: float
    mean_a: float
    count: int


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float
    n: int

    def __call__(self, d0):
        return self.prefactor / np.asarray(d0, dtype=float) ** self.exponent


def _window_stride(t, dt_window):
    dt = t[1] - t[0]
    k = int(round(dt_window / dt))
    if k < 1 or abs(k * dt - dt_window) > 1e-9 * max(1.0, dt_window):
        raise ValueError(f"output step {dt:g} does not divide the window {dt_window:g}")
    return k


def _refined_min(d):
    """Minimum of sampled distances with a parabolic refinement of d^2 around
    the smallest interior sample. The refinement is skipped when the parabola
    is not a plausible fly-by (vertex outside the bracket or below zero),
    which happens when the X-point jumps between samples."""
    if np.any(~np.isfinite(d)):
        return math.nan
    j = int(np.argmin(d))
    best = float(d[j])
    if 0 < j < len(d) - 1:
        f0, f1, f2 = d[j - 1] ** 2, d[j] ** 2, d[j + 1] ** 2
        curv = f0 - 2 * f1 + f2
        if curv > 0:
            offset = (f0 - f2) / (2 * curv)
            if abs(offset) <= 1:
                vertex = f1 - (f2 - f0) ** 2 / (8 * curv)
                if 0 <= vertex <= f1:
                    best = math.sqrt(vertex)
    return best


def encounter_distances(p: ModelParams, traj: Trajectory):
    """Distances from each sample to the node (eps), the X-point (d), and the
    node-X-point separation (d0); nan where undefined."""
    xn, yn = nodal_points(p, traj.t)
    xp, yp, _, _, ok = xpoint_track(p, traj.t)
    eps = np.hypot(traj.x - xn, traj.y - yn)
    d = np.where(ok, np.hypot(traj.x - xp, traj.y - yp), np.nan)
    d0 = np.where(ok, np.hypot(xp - xn, yp - yn), np.nan)
    return eps, d, d0


def stretching_series(p: ModelParams, traj: Trajectory, dt_window: float = WINDOW,
                      distances: bool = True) -> list[StretchWindow]:
    """Stretching numbers a_i = ln(|xi(t_i + dt)| / |xi(t_i)|) / dt over
    consecutive windows, with the in-window minimum distances to the node,
    the X-point and between the two. Distances are nan in windows during
    which the node goes through infinity.

    The trajectory must carry deviations and be sampled on a grid dividing
    dt_window; a finer grid gives better minima.
    """
    if not traj.has_deviation:
        raise ValueError("trajectory carries no deviation vector")
    t = traj.t
    k = _window_stride(t, dt_window)
    lx = traj.log_xi()
    n_win = (len(t) - 1) // k
    if distances:
        eps, d, d0 = encounter_distances(p, traj)
    # the node passes through infinity where sin(ct) or sin((1+c)t) changes sign
    branch = np.stack([np.floor(p.c * t / math.pi), np.floor((1 + p.c) * t / math.pi)])
    out = []
    for i in range(n_win):
        j0, j1 = i * k, (i + 1) * k
        a = (lx[j1] - lx[j0]) / (t[j1] - t[j0])
        diverges = np.any(branch[:, j0] != branch[:, j1])
        if distances and not diverges:
            sl = slice(j0, j1 + 1)
            e_min, d_min, d0_min = _refined_min(eps[sl]), _refined_min(d[sl]), _refined_min(d0[sl])
        else:
            e_min = d_min = d0_min = math.nan
        out.append(StretchWindow(float(t[j0]), float(a), e_min, d_min, d0_min))
    missing = sum(1 for w in out if math.isnan(w.d_min))
    if distances and missing:
        log.info("%d of %d windows have no X-point distance", missing, len(out))
    return out


def bin_by_distance(windows, which: str = "d", delta: float = BIN_WIDTH) -> list[BinnedAverage]:
    """Plain mean of the stretching numbers in bins [k delta - delta/2, k delta + delta/2).

    Windows with an undefined distance are left out; empty bins are omitted.
    """
    if not windows:
        raise ValueError("no windows to bin")
    field_name = {"d": "d_min", "eps": "eps_min", "d0": "d0_min"}[which]
    dist = np.array([getattr(w, field_name) for w in windows], dtype=float)
    a = np.array([w.a_i for w in windows], dtype=float)
    keep = np.isfinite(dist)
    dist, a = dist[keep], a[keep]
    idx = np.floor(dist / delta + 0.5).astype(np.int64)
    out = []
    for b in np.unique(idx):
        sel = idx == b
        out.append(BinnedAverage(float(b * delta), float(a[sel].mean()), int(sel.sum())))
    return out


def power_law_fit(d0, lam) -> PowerLawFit:
    """Least-squares fit lam = A / d0^p in log-log coordinates."""
    d0 = np.asarray(d0, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if d0.shape != lam.shape or d0.size < 20:
        raise ValueError("need at least 20 paired samples")
    if np.any(d0 <= 0) or np.any(lam <= 0):
        raise ValueError("samples must be positive")
    if d0.max() < 2 * d0.min():
        raise DegenerateFit("d0 spans less than a factor 2")
    X = np.log(1 / d0)
    slope, intercept = np.polyfit(X, np.log(lam), 1)
    return PowerLawFit(float(slope), float(math.exp(intercept)), int(d0.size))


def chi_trend(t, chi) -> float:
    """Log-log slope of chi(t) over the last decade of t."""
    t = np.asarray(t, dtype=float)
    chi = np.asarray(chi, dtype=float)
    sel = (t >= t[-1] / 10) & (chi > 0)
    if sel.sum() < 3:
        return math.nan
    return float(np.polyfit(np.log(t[sel]), np.log(chi[sel]), 1)[0])


def classify_orbit(t, chi) -> str:
    """'chaotic', 'regular' or 'undecided' from a finite-time LCN series.

    Chaotic: chi(t_end) > 1e-2 and chi not decaying over the last decade
    (log-log slope above -1/2). Regular: chi(t_end) < 2e-3 and chi decaying
    roughly like 1/t (slope below -1/2).
    """
    t = np.asarray(t, dtype=float)
    if t[-1] < 1000:
        raise ValueError("classification needs chi sampled up to t >= 1000")
    chi_end = float(chi[-1])
    slope = chi_trend(t, chi)
    if chi_end > CHAOTIC_CHI and slope > SLOPE_SPLIT:
        return "chaotic"
    if chi_end < REGULAR_CHI and slope < SLOPE_SPLIT:
        return "regular"
    return "undecided"


def classify_trajectory(traj: Trajectory) -> str:
    return classify_orbit(*chi_series(traj))


def arrival_times(t, dS, levels=(1e-3, 1e-2, 1e-1), hold: float = 10.0):
    """First time from which the separation stays of order `level` or larger
    (>= level / sqrt(10)) for at least `hold` time units. nan if never."""
    t = np.asarray(t, dtype=float)
    dS = np.asarray(dS, dtype=float)
    out = []
    for level in levels:
        thr = level / math.sqrt(10)
        above = dS >= thr
        # index of the next sample below threshold, for every sample
        nxt = np.full(len(t), len(t))
        below = np.nonzero(~above)[0]
        pos = np.searchsorted(below, np.arange(len(t)))
        has = pos < len(below)
        nxt[has] = below[pos[has]]
        t_next = np.where(nxt < len(t), t[np.minimum(nxt, len(t) - 1)], np.inf)
        good = above & (t_next - t >= hold) & (t + hold <= t[-1] + 1e-12)
        idx = np.nonzero(good)[0]
        out.append(float(t[idx[0]]) if idx.size else math.nan)
    return out


def growth_factor(t, dS, t1: float, t2: float) -> float:
    """dS(t2) / dS(t1) by linear interpolation on the sampled separation."""
    return float(np.interp(t2, t, dS) / np.interp(t1, t, dS))


def local_rate(t, dS, t1: float, t2: float) -> float:
    return math.log(growth_factor(t, dS, t1, t2)) / (t2 - t1)


__all__ = [
    "StretchWindow", "BinnedAverage", "PowerLawFit", "encounter_distances",
    "stretching_series", "bin_by_distance", "power_law_fit", "chi_trend", "classify_orbit",
    "classify_trajectory", "arrival_times", "growth_factor", "local_rate",
]
