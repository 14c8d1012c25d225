"""Compiled scalar kernels used in the inner loops (integration, X-point search).

Parameter vectors are plain float64 arrays so the kernels can be shared by the
generic integrator below:

    orbit prm:   [a, bsc, c]
    frozen prm:  [a, bsc, c, t0, x0, y0, x0dot, y0dot, direction, r_capture, r_escape]
"""
import math

import numpy as np
from numba import njit

G_FLOOR = 1e-12
TOL_DIV = 1e-12

OK = 0
NEAR_NODE = 1
STEP_UNDERFLOW = 2
MAX_STEPS = 3
STOPPED = 4


@njit(cache=True)
def field_terms(x, y, t, a, bsc, c):
    """Return (G, Gx, Gy, Nx, Ny) with velocity = (-Nx/G, -Ny/G)."""
    ct, cS, cs = math.cos(t), math.cos((1 + c) * t), math.cos(c * t)
    st, sS, ss = math.sin(t), math.sin((1 + c) * t), math.sin(c * t)
    G = (1 + 2 * a * x * ct + 2 * bsc * x * y * cS + a * a * x * x
         + 2 * a * bsc * x * x * y * cs + bsc * bsc * x * x * y * y)
    Gx = (2 * a * ct + 2 * bsc * y * cS + 2 * a * a * x
          + 4 * a * bsc * x * y * cs + 2 * bsc * bsc * x * y * y)
    Gy = 2 * bsc * x * cS + 2 * a * bsc * x * x * cs + 2 * bsc * bsc * x * x * y
    Nx = a * st + bsc * y * sS
    Ny = bsc * x * (a * x * ss + sS)
    return G, Gx, Gy, Nx, Ny


@njit(cache=True)
def velocity_jacobian(x, y, t, a, bsc, c):
    """Velocity, Jacobian entries and G at (x, y, t)."""
    G, Gx, Gy, Nx, Ny = field_terms(x, y, t, a, bsc, c)
    vx = -Nx / G
    vy = -Ny / G
    sS = math.sin((1 + c) * t)
    G2 = G * G
    j11 = Nx * Gx / G2
    j12 = -bsc * sS / G + Nx * Gy / G2
    j21 = -(2 * a * bsc * x * math.sin(c * t) + bsc * sS) / G + Ny * Gx / G2
    j22 = Ny * Gy / G2
    return vx, vy, j11, j12, j21, j22, G


@njit(cache=True)
def nodal(t, a, bsc, c):
    """(ok, x0, y0, x0dot, y0dot); ok is False when the node is at infinity."""
    S = math.sin((1 + c) * t)
    s = math.sin(c * t)
    if abs(S) < TOL_DIV or abs(s) < TOL_DIV:
        return False, math.nan, math.nan, math.nan, math.nan
    dS = (1 + c) * math.cos((1 + c) * t)
    ds = c * math.cos(c * t)
    st = math.sin(t)
    dst = math.cos(t)
    x0 = -S / (a * s)
    y0 = -a * st / (bsc * S)
    xd = -(dS * s - S * ds) / (a * s * s)
    yd = -a * (dst * S - st * dS) / (bsc * S * S)
    return True, x0, y0, xd, yd


@njit(cache=True)
def rhs_orbit(t, z, prm):
    out = np.empty(2)
    G, Gx, Gy, Nx, Ny = field_terms(z[0], z[1], t, prm[0], prm[1], prm[2])
    if not G > G_FLOOR:
        return out, False
    out[0] = -Nx / G
    out[1] = -Ny / G
    return out, True


@njit(cache=True)
def rhs_orbit_dev(t, z, prm):
    out = np.empty(4)
    vx, vy, j11, j12, j21, j22, G = velocity_jacobian(z[0], z[1], t, prm[0], prm[1], prm[2])
    if not G > G_FLOOR:
        return out, False
    out[0] = vx
    out[1] = vy
    out[2] = j11 * z[2] + j12 * z[3]
    out[3] = j21 * z[2] + j22 * z[3]
    return out, True


@njit(cache=True)
def moving_terms(u, v, prm):
    """Frozen co-moving field expanded about the node: (G, Gu, Gv, Nu, Nv) with
    du/dt = -Nu/G - x0dot, dv/dt = -Nv/G - y0dot.

    G is assembled from its quadratic, cubic and quartic parts in (u, v), which
    stays accurate arbitrarily close to the node where the rest-frame
    polynomial loses all digits to cancellation.
    """
    a, bsc, c, t0, x0 = prm[0], prm[1], prm[2], prm[3], prm[4]
    C = math.cos((1 + c) * t0)
    S = math.sin((1 + c) * t0)
    s = math.sin(c * t0)
    b2 = bsc * bsc
    G = (u * u / (x0 * x0) - 2 * bsc * C * u * v + b2 * x0 * x0 * v * v
         - 2 * bsc * C / x0 * u * u * v + 2 * b2 * x0 * u * v * v + b2 * u * u * v * v)
    Gu = (2 * u / (x0 * x0) - 2 * bsc * C * v - 4 * bsc * C / x0 * u * v
          + 2 * b2 * x0 * v * v + 2 * b2 * u * v * v)
    Gv = (-2 * bsc * C * u + 2 * b2 * x0 * x0 * v - 2 * bsc * C / x0 * u * u
          + 4 * b2 * x0 * u * v + 2 * b2 * u * u * v)
    Nu = bsc * S * v
    Nv = -bsc * S * u + a * bsc * s * u * u
    return G, Gu, Gv, Nu, Nv


@njit(cache=True)
def moving_velocity_jacobian(u, v, prm):
    G, Gu, Gv, Nu, Nv = moving_terms(u, v, prm)
    bS = prm[1] * math.sin((1 + prm[2]) * prm[3])
    G2 = G * G
    du = -Nu / G - prm[6]
    dv = -Nv / G - prm[7]
    j11 = Nu * Gu / G2
    j12 = -bS / G + Nu * Gv / G2
    j21 = (bS - 2 * prm[0] * prm[1] * math.sin(prm[2] * prm[3]) * u) / G + Nv * Gu / G2
    j22 = Nv * Gv / G2
    return du, dv, j11, j12, j21, j22, G


@njit(cache=True)
def frozen_field(u, v, prm):
    """Co-moving velocity at frozen t0: rest-frame velocity minus node velocity."""
    G, Gu, Gv, Nu, Nv = moving_terms(u, v, prm)
    if not G > 0.0:
        return 0.0, 0.0, G
    return -Nu / G - prm[6], -Nv / G - prm[7], G


@njit(cache=True)
def rhs_arclength(s, z, prm):
    """Unit direction field of the frozen moving-frame flow; prm[8] = +-1 picks
    forward or backward orientation."""
    out = np.empty(2)
    du, dv, G = frozen_field(z[0], z[1], prm)
    if not G > 0.0:
        return out, False
    norm = math.hypot(du, dv)
    if norm == 0.0:
        return out, False
    out[0] = prm[8] * du / norm
    out[1] = prm[8] * dv / norm
    return out, True


@njit(cache=True)
def never_stop(z, prm):
    return False


@njit(cache=True)
def stop_trace(z, prm):
    """Stop tracing a manifold branch once it is captured by the node or leaves the window."""
    r = math.hypot(z[0], z[1])
    return r < prm[9] or r > prm[10]


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
_D1, _D3, _D4 = -12715105075 / 11282082432, 87487479700 / 32700410799, -10690763975 / 1880347072
_D5, _D6, _D7 = 701980252875 / 199316789632, -1453857185 / 822651844, 69997945 / 29380423


@njit(cache=True)
def dopri5(rhs, stop, t0, y0, t_end, prm, rtol, atol, hmax, dt_out, max_steps, n_pos, renorm):
    """Integrate dy/dt = rhs(t, y, prm) from t0 to t_end.

    Solution samples are produced every dt_out through the order-4 continuous
    extension. Components from n_pos on are a deviation vector: its error is
    measured relative to its own norm, and when renorm is set it is rescaled to
    unit length whenever its norm leaves [1e-100, 1e100], the log of the
    discarded factor being accumulated and reported per sample.

    Returns (t_out, y_out, logscale_out, n_out, status, stats) where stats is
    [accepted, rejected, node_rejections, h_min, h_max, t_reached].
    """
    n = y0.shape[0]
    n_grid = int(math.floor((t_end - t0) / dt_out + 1e-9)) + 1
    last_on_grid = abs(t0 + (n_grid - 1) * dt_out - t_end) < 1e-9 * max(1.0, abs(t_end))
    n_total = n_grid if last_on_grid else n_grid + 1
    t_out = np.empty(n_total)
    y_out = np.empty((n_total, n))
    ls_out = np.empty(n_total)
    stats = np.zeros(6)
    stats[3] = math.inf

    y = y0.copy()
    t = t0
    logscale = 0.0
    t_out[0] = t0
    y_out[0] = y0
    ls_out[0] = 0.0
    k_out = 1

    k1, ok = rhs(t, y, prm)
    if not ok:
        stats[5] = t
        return t_out, y_out, ls_out, k_out, NEAR_NODE, stats
    h = min(hmax, 1e-3, abs(t_end - t0))
    if h <= 0.0:
        stats[5] = t
        return t_out, y_out, ls_out, k_out, OK, stats
    facold = 1e-4
    beta = 0.04
    expo1 = 0.2 - beta * 0.75
    safe = 0.9
    facc1 = 1.0 / 0.2
    facc2 = 1.0 / 10.0
    hmin = 1e-14
    last_was_node = False
    steps = 0
    ytmp = np.empty(n)
    y1 = np.empty(n)
    err_vec = np.empty(n)
    status = OK

    while t < t_end:
        if steps >= max_steps:
            status = MAX_STEPS
            break
        if t + h > t_end:
            h = t_end - t
        if h < hmin:
            status = NEAR_NODE if last_was_node else STEP_UNDERFLOW
            break
        steps += 1
        for i in range(n):
            ytmp[i] = y[i] + h * _A21 * k1[i]
        k2, ok = rhs(t + _C2 * h, ytmp, prm)
        if ok:
            for i in range(n):
                ytmp[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
            k3, ok = rhs(t + _C3 * h, ytmp, prm)
        if ok:
            for i in range(n):
                ytmp[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
            k4, ok = rhs(t + _C4 * h, ytmp, prm)
        if ok:
            for i in range(n):
                ytmp[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
            k5, ok = rhs(t + _C5 * h, ytmp, prm)
        if ok:
            for i in range(n):
                ytmp[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                      + _A64 * k4[i] + _A65 * k5[i])
            k6, ok = rhs(t + h, ytmp, prm)
        if ok:
            for i in range(n):
                y1[i] = y[i] + h * (_A71 * k1[i] + _A73 * k3[i] + _A74 * k4[i]
                                    + _A75 * k5[i] + _A76 * k6[i])
            k7, ok = rhs(t + h, y1, prm)
        if not ok:
            stats[2] += 1
            stats[1] += 1
            last_was_node = True
            h *= 0.25
            continue
        last_was_node = False

        for i in range(n):
            err_vec[i] = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i]
                              + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
        dev0 = 0.0
        dev1 = 0.0
        for i in range(n_pos, n):
            dev0 += y[i] * y[i]
            dev1 += y1[i] * y1[i]
        devscale = max(math.sqrt(dev0), math.sqrt(dev1))
        err = 0.0
        for i in range(n):
            if i < n_pos:
                sk = atol + rtol * max(abs(y[i]), abs(y1[i]))
            else:
                sk = rtol * devscale + 1e-300
            err += (err_vec[i] / sk) ** 2
        err = math.sqrt(err / n)

        fac11 = err ** expo1
        fac = fac11 / facold ** beta
        fac = max(facc2, min(facc1, fac / safe))
        hnew = h / fac
        if err <= 1.0:
            facold = max(err, 1e-4)
            stats[0] += 1
            stats[3] = min(stats[3], h)
            stats[4] = max(stats[4], h)
            t_new = t + h
            if t_end - t_new < 1e-12 * max(1.0, abs(t_end)):
                t_new = t_end
            # dense output for grid points in (t, t_new]
            while k_out < n_total:
                tk = t0 + k_out * dt_out if k_out < n_grid else t_end
                if tk > t_new + 1e-12 * max(1.0, abs(t_new)):
                    break
                theta = (tk - t) / h
                theta = min(max(theta, 0.0), 1.0)
                th1 = 1.0 - theta
                for i in range(n):
                    ydiff = y1[i] - y[i]
                    bspl = h * k1[i] - ydiff
                    r5 = h * (_D1 * k1[i] + _D3 * k3[i] + _D4 * k4[i]
                              + _D5 * k5[i] + _D6 * k6[i] + _D7 * k7[i])
                    y_out[k_out, i] = y[i] + theta * (ydiff + th1 * (
                        bspl + theta * ((ydiff - h * k7[i] - bspl) + th1 * r5)))
                t_out[k_out] = tk
                ls_out[k_out] = logscale
                k_out += 1
            for i in range(n):
                y[i] = y1[i]
                k1[i] = k7[i]
            t = t_new
            if renorm and n_pos < n:
                norm = 0.0
                for i in range(n_pos, n):
                    norm += y[i] * y[i]
                norm = math.sqrt(norm)
                if norm > 1e100 or norm < 1e-100:
                    for i in range(n_pos, n):
                        y[i] /= norm
                        k1[i] /= norm
                    logscale += math.log(norm)
            if stop(y, prm):
                status = STOPPED
                break
            h = min(hnew, hmax)
        else:
            stats[1] += 1
            hnew = h / min(facc1, fac11 / safe)
            h = hnew
    stats[5] = t
    if status == STOPPED and k_out < n_total:
        # record the stopping state as a final sample
        t_out[k_out] = t
        y_out[k_out] = y
        ls_out[k_out] = logscale
        k_out += 1
    return t_out, y_out, ls_out, k_out, status, stats


@njit(cache=True)
def xpoint_newton(prm, u, v, max_iter, tol):
    """Damped Newton on the frozen moving-frame field from seed (u, v).

    Returns (converged, u, v, residual, iterations).
    """
    f1, f2, j11, j12, j21, j22, G = moving_velocity_jacobian(u, v, prm)
    if not G > 0.0:
        return False, u, v, math.inf, 0
    res = max(abs(f1), abs(f2))
    for it in range(max_iter):
        if res < tol:
            return True, u, v, res, it
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not math.isfinite(det):
            return False, u, v, res, it
        du = (j22 * f1 - j12 * f2) / det
        dv = (-j21 * f1 + j11 * f2) / det
        lam = 1.0
        norm0 = math.hypot(f1, f2)
        accepted = False
        while lam > 1e-6:
            un = u - lam * du
            vn = v - lam * dv
            g1, g2, k11, k12, k21, k22, G = moving_velocity_jacobian(un, vn, prm)
            if G > 0.0:
                if math.hypot(g1, g2) < norm0 or (lam == 1.0 and math.hypot(g1, g2) <= norm0 * (1 + 1e-12)):
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            # stalled at round-off level
            return res < 1e2 * tol, u, v, res, it
        u, v = un, vn
        f1, f2 = g1, g2
        j11, j12, j21, j22 = k11, k12, k21, k22
        res = max(abs(f1), abs(f2))
    return res < tol, u, v, res, max_iter


@njit(cache=True)
def frozen_prm(t0, a, bsc, c):
    """(ok, prm) for the frozen moving-frame field at t0."""
    prm = np.zeros(11)
    ok, x0, y0, xd, yd = nodal(t0, a, bsc, c)
    prm[0] = a
    prm[1] = bsc
    prm[2] = c
    prm[3] = t0
    prm[4] = x0
    prm[5] = y0
    prm[6] = xd
    prm[7] = yd
    prm[8] = 1.0
    return ok, prm


@njit(cache=True)
def seed_leading(prm):
    """Balance the leading-order rotation around the node against the frame drift."""
    bsc, t0, x0, xd, yd = prm[1], prm[3], prm[4], prm[6], prm[7]
    B = bsc * math.sin((1 + prm[2]) * t0)
    speed = math.hypot(xd, yd)
    if speed == 0.0 or B == 0.0:
        return False, 0.0, 0.0
    sgn = 1.0 if B > 0 else -1.0
    # (-sin phi, cos phi) = sgn * (xd, yd) / speed
    sphi = -sgn * xd / speed
    cphi = sgn * yd / speed
    C = math.cos((1 + prm[2]) * t0)
    g2 = cphi * cphi / (x0 * x0) - 2 * bsc * cphi * sphi * C + bsc * bsc * x0 * x0 * sphi * sphi
    R = abs(B) / (g2 * speed)
    return True, R * cphi, R * sphi


@njit(cache=True)
def seed_kl(prm):
    """Second-order closed-form estimate of the X-point (requires y0dot != 0)."""
    a, bsc, c, t0, x0, xd, yd = prm[0], prm[1], prm[2], prm[3], prm[4], prm[6], prm[7]
    if abs(yd) < 1e-8:
        return False, 0.0, 0.0
    S = math.sin((1 + c) * t0)
    s = math.sin(c * t0)
    K = bsc * S
    L = (2 * xd * bsc * math.cos((1 + c) * t0) + yd / (x0 * x0)
         + bsc * bsc * x0 * x0 * xd * xd / yd) + a * bsc * s
    if L == 0.0:
        return False, 0.0, 0.0
    u0 = K / L
    v0 = (xd / yd) * (a * u0 * u0 * s / S - u0)
    return True, u0, v0


@njit(cache=True)
def _saddle_ok(prm, u, v):
    du, dv, j11, j12, j21, j22, G = moving_velocity_jacobian(u, v, prm)
    return G > 0.0 and j11 * j22 - j12 * j21 < 0.0 and math.hypot(u, v) > 0.0


@njit(cache=True)
def xpoint_solve(prm, u_prev, v_prev, have_prev, tol, max_iter):
    """Try seeds in turn (previous solution, leading order, closed form, axis
    points, rings) and return the first Newton solution that is a saddle.

    Returns (ok, u, v, residual, seed_kind).
    """
    best_res = math.inf
    if have_prev:
        conv, u, v, res, it = xpoint_newton(prm, u_prev, v_prev, max_iter, tol)
        if conv and _saddle_ok(prm, u, v):
            return True, u, v, res, 0
    ok, su, sv = seed_leading(prm)
    if ok:
        conv, u, v, res, it = xpoint_newton(prm, su, sv, max_iter, tol)
        if conv and _saddle_ok(prm, u, v):
            return True, u, v, res, 1
    ok, su, sv = seed_kl(prm)
    if ok:
        conv, u, v, res, it = xpoint_newton(prm, su, sv, max_iter, tol)
        if conv and _saddle_ok(prm, u, v):
            return True, u, v, res, 2
    else:
        r = 0.1 * abs(prm[4])
        for k in range(4):
            ang = 0.5 * math.pi * k
            conv, u, v, res, it = xpoint_newton(prm, r * math.cos(ang), r * math.sin(ang),
                                                max_iter, tol)
            if conv and _saddle_ok(prm, u, v):
                return True, u, v, res, 3
    r = 1e-3
    while r < 10.0:
        for k in range(12):
            ang = 2 * math.pi * k / 12
            conv, u, v, res, it = xpoint_newton(prm, r * math.cos(ang), r * math.sin(ang),
                                                max_iter, tol)
            if conv and _saddle_ok(prm, u, v):
                return True, u, v, res, 4
            best_res = min(best_res, res)
        r *= 2.0
    return False, math.nan, math.nan, best_res, -1


@njit(cache=True)
def xpoint_track(ts, a, bsc, c, tol, max_iter):
    """X-point positions (absolute x, y) along a sequence of times, each solve
    seeded from the previous one. ok[i] is False where the node is at infinity
    or no saddle was found."""
    n = ts.shape[0]
    xs = np.full(n, np.nan)
    ys = np.full(n, np.nan)
    nx = np.full(n, np.nan)
    ny = np.full(n, np.nan)
    ok_out = np.zeros(n, dtype=np.bool_)
    have = False
    up = 0.0
    vp = 0.0
    for i in range(n):
        okn, prm = frozen_prm(ts[i], a, bsc, c)
        if not okn:
            have = False
            continue
        nx[i] = prm[4]
        ny[i] = prm[5]
        ok, u, v, res, kind = xpoint_solve(prm, up, vp, have, tol, max_iter)
        if ok:
            xs[i] = prm[4] + u
            ys[i] = prm[5] + v
            ok_out[i] = True
            up, vp, have = u, v, True
        else:
            have = False
    return xs, ys, nx, ny, ok_out
