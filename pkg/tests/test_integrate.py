import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from bohmchaos import ModelParams, NearNode
from bohmchaos.field import jacobian, velocity
from bohmchaos.integrate import (chi_series, finite_time_lcn, integrate_orbit,
                                 integrate_with_deviation, orbit_bounding_box, pair_separation)


def _reference(p, x0, y0, t_end, dt):
    t_eval = np.arange(0, t_end + dt / 2, dt)
    sol = solve_ivp(lambda t, z: velocity(p, z[0], z[1], t), (0, t_end), [x0, y0],
                    method="DOP853", rtol=1e-13, atol=1e-13, t_eval=t_eval)
    return sol.t, sol.y


@pytest.mark.parametrize("x0,y0", [(0.75, 0.25), (1.0, 1.0), (-1.1, -1.1)])
def test_matches_independent_integrator(p, x0, y0):
    tr = integrate_orbit(p, x0, y0, 20.0, 1e-12, 0.1)
    t, (x, y) = _reference(p, x0, y0, 20.0, 0.1)
    assert np.allclose(tr.t, t, atol=1e-12)
    assert np.abs(tr.x - x).max() < 1e-7 and np.abs(tr.y - y).max() < 1e-7


def test_deterministic(p):
    a = integrate_with_deviation(p, -1.1, -1.1, 1.0, 0.0, 50.0)
    b = integrate_with_deviation(p, -1.1, -1.1, 1.0, 0.0, 50.0)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.log_xi(), b.log_xi())


def test_deviation_matches_variational_reference(p):
    # linearised flow from an independent integration of the variational equations
    def rhs(t, z):
        J = jacobian(p, z[0], z[1], t)
        return [*velocity(p, z[0], z[1], t), J[0, 0] * z[2] + J[0, 1] * z[3],
                J[1, 0] * z[2] + J[1, 1] * z[3]]
    sol = solve_ivp(rhs, (0, 10), [0.75, 0.25, 1.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-12)
    tr = integrate_with_deviation(p, 0.75, 0.25, 1.0, 0.0, 10.0)
    ref = math.log(math.hypot(sol.y[2, -1], sol.y[3, -1]))
    assert tr.log_xi()[-1] == pytest.approx(ref, abs=1e-7)


def test_deviation_against_neighbour_orbit(p):
    h = 1e-7
    tr = integrate_with_deviation(p, 0.75, 0.25, 1.0, 0.0, 5.0)
    nb = integrate_orbit(p, 0.75 + h, 0.25, 5.0)
    xi = np.exp(tr.log_scale) * np.array([tr.dx, tr.dy])
    fd = np.array([nb.x - tr.x, nb.y - tr.y]) / h
    assert np.allclose(xi, fd, rtol=1e-4, atol=1e-4)


@settings(max_examples=10, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.1, 3.0), st.floats(-3.0, 3.0))
def test_chi_is_independent_of_initial_deviation_length(x0, y0, scale, angle):
    p = ModelParams(1.0, 1.0, math.sqrt(2) / 2)
    try:
        a = integrate_with_deviation(p, x0, y0, math.cos(angle), math.sin(angle), 5.0)
        b = integrate_with_deviation(p, x0, y0, scale * math.cos(angle), scale * math.sin(angle), 5.0)
    except NearNode:
        return
    assert np.allclose(chi_series(a)[1], chi_series(b)[1], atol=1e-8)


def test_chi_windows_telescope(p):
    tr = integrate_with_deviation(p, -1.1, -1.1, 1.0, 0.0, 100.0)
    recs = finite_time_lcn(tr, 1.0)
    assert len(recs) == 100
    t, chi = chi_series(tr)
    assert recs[-1].chi == pytest.approx(chi[-1], rel=1e-14)
    assert recs[-1].log_norm_accum == pytest.approx(chi[-1] * 100, rel=1e-14)


def test_pair_separation_starts_at_offset(p):
    t, dS = pair_separation(p, (-1.1, -1.1), (-1.1 + 1e-4, -1.1), 10.0)
    assert dS[0] == pytest.approx(1e-4, rel=1e-12)
    assert len(t) == len(dS) == 101


def test_input_validation(p):
    with pytest.raises(ValueError):
        integrate_orbit(p, 0.5, 0.5, 10.0, tol=1e-3)
    with pytest.raises(ValueError):
        integrate_orbit(p, 0.5, 0.5, -1.0)
    with pytest.raises(ValueError):
        integrate_with_deviation(p, 0.5, 0.5, 0.0, 0.0, 1.0)
    # psi vanishes at t = 0 on the line x = -1/a
    with pytest.raises(NearNode):
        integrate_orbit(p, -1.0, 0.0, 1.0)


def test_regular_orbit_stays_bounded(p):
    tr = integrate_orbit(p, 0.75, 0.25, 200.0)
    xmin, xmax, ymin, ymax = orbit_bounding_box(tr)
    assert max(-xmin, xmax, -ymin, ymax) < 5
    assert tr.stats["accepted"] > 0
