import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bohmchaos import ModelParams, NearNode, NodalAtInfinity
from bohmchaos.field import (eval_G, eval_psi, jacobian, nodal_point, nodal_points, psi_gradient,
                             rest_frame_critical_points, rest_frame_stream,
                             rest_frame_stream_gradient, velocity)

coord = st.floats(-3, 3)
time = st.floats(0.05, 200)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(1, 1, 0)
    with pytest.raises(ValueError):
        ModelParams(math.nan, 1, 0.5)
    assert ModelParams(1, 2, 0.25).bsc == pytest.approx(1.0)
    assert ModelParams(1, 1, 0.7).rational_c_warning
    assert not ModelParams(1, 1, math.sqrt(2) / 2).rational_c_warning


def test_psi_matches_direct_formula(p):
    x, y, t = 0.3, -0.7, 2.1
    direct = np.exp(-(x * x + p.c * y * y) / 2 - 1j * (1 + p.c) * t / 2) * (
        1 + p.a * x * np.exp(-1j * t) + p.b * math.sqrt(p.c) * x * y * np.exp(-1j * (1 + p.c) * t))
    assert eval_psi(p, x, y, t) == pytest.approx(direct, rel=1e-15)


def test_psi_solves_schrodinger(p):
    # i psi_t = -(psi_xx + psi_yy)/2 + (x^2 + c^2 y^2)/2 psi, by finite differences
    x, y, t, h = 0.4, -0.3, 1.3, 1e-3
    f = lambda x, y, t: eval_psi(p, x, y, t)
    psi_t = (f(x, y, t + h) - f(x, y, t - h)) / (2 * h)
    lap = (f(x + h, y, t) + f(x - h, y, t) + f(x, y + h, t) + f(x, y - h, t) - 4 * f(x, y, t)) / h ** 2
    H = -lap / 2 + (x * x + p.c ** 2 * y * y) / 2 * f(x, y, t)
    assert abs(1j * psi_t - H) < 1e-5


@settings(max_examples=200, deadline=None)
@given(coord, coord, time)
def test_velocity_is_phase_gradient(x, y, t):
    p = ModelParams(1.0, 1.0, math.sqrt(2) / 2)
    if eval_G(p, x, y, t) < 1e-6:
        return
    vx, vy = velocity(p, x, y, t)
    gx, gy = psi_gradient(p, x, y, t)
    psi = eval_psi(p, x, y, t)
    assert vx == pytest.approx((gx / psi).imag, rel=1e-9, abs=1e-12)
    assert vy == pytest.approx((gy / psi).imag, rel=1e-9, abs=1e-12)


def test_psi_gradient_finite_difference(p):
    x, y, t, h = 0.2, 0.9, 3.3, 1e-6
    gx, gy = psi_gradient(p, x, y, t)
    fx = (eval_psi(p, x + h, y, t) - eval_psi(p, x - h, y, t)) / (2 * h)
    fy = (eval_psi(p, x, y + h, t) - eval_psi(p, x, y - h, t)) / (2 * h)
    assert abs(gx - fx) < 1e-8 and abs(gy - fy) < 1e-8


@settings(max_examples=100, deadline=None)
@given(coord, coord, time)
def test_jacobian_finite_difference(x, y, t):
    p = ModelParams(1.0, 1.0, math.sqrt(2) / 2)
    if eval_G(p, x, y, t) < 1e-2:
        return
    h = 1e-6
    J = jacobian(p, x, y, t)
    col_x = (np.array(velocity(p, x + h, y, t)) - np.array(velocity(p, x - h, y, t))) / (2 * h)
    col_y = (np.array(velocity(p, x, y + h, t)) - np.array(velocity(p, x, y - h, t))) / (2 * h)
    scale = max(1.0, np.abs(J).max())
    assert np.allclose(J[:, 0], col_x, atol=1e-5 * scale)
    assert np.allclose(J[:, 1], col_y, atol=1e-5 * scale)


def test_G_is_squared_modulus_of_polynomial(p):
    rng = np.random.default_rng(1)
    x, y, t = rng.uniform(-2, 2, 50), rng.uniform(-2, 2, 50), rng.uniform(0, 50, 50)
    env = np.exp(-(x * x + p.c * y * y))
    assert np.allclose(eval_G(p, x, y, t) * env, np.abs(eval_psi(p, x, y, t)) ** 2, rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 500))
def test_nodal_point_is_a_zero(t):
    p = ModelParams(1.0, 1.0, math.sqrt(2) / 2)
    try:
        nf = nodal_point(p, t)
    except NodalAtInfinity:
        return
    if max(abs(nf.x0), abs(nf.y0)) > 20:
        return
    # rounding of the phases is amplified by 1/|sin| in the node formulas
    cond = (1 + t) * (1 + abs(nf.x0) + abs(nf.x0 * nf.y0)) * (
        1 / abs(math.sin(p.c * t)) + 1 / abs(math.sin((1 + p.c) * t)))
    env = math.exp(-(nf.x0 ** 2 + p.c * nf.y0 ** 2) / 2)
    assert abs(eval_psi(p, nf.x0, nf.y0, t)) / env < 1e-15 * cond


def test_nodal_velocity_finite_difference(p):
    t, h = 7.3, 1e-6
    nf = nodal_point(p, t)
    a, b = nodal_point(p, t + h), nodal_point(p, t - h)
    assert nf.x0dot == pytest.approx((a.x0 - b.x0) / (2 * h), rel=1e-7)
    assert nf.y0dot == pytest.approx((a.y0 - b.y0) / (2 * h), rel=1e-7)


def test_nodal_at_infinity(p):
    with pytest.raises(NodalAtInfinity):
        nodal_point(p, 0.0)
    t = math.pi / (1 + p.c)
    with pytest.raises(NodalAtInfinity):
        nodal_point(p, t)
    x0, y0 = nodal_points(p, np.array([0.0, 1.0]))
    assert math.isnan(x0[0]) and np.isfinite(x0[1])


def test_velocity_raises_at_node(p):
    nf = nodal_point(p, 3.0)
    with pytest.raises(NearNode):
        velocity(p, nf.x0, nf.y0, 3.0)


def test_velocity_broadcasts(p):
    x = np.linspace(-1, 1, 7)
    vx, vy = velocity(p, x, 0.5, 1.0)
    assert vx.shape == (7,)
    assert vx[3] == pytest.approx(velocity(p, x[3], 0.5, 1.0).vx)


def test_stream_function_gradient(p):
    x, y, t, h = 0.3, -0.4, 2.0, 1e-6
    gx, gy = rest_frame_stream_gradient(p, x, y, t)
    assert gx == pytest.approx((rest_frame_stream(p, x + h, y, t) - rest_frame_stream(p, x - h, y, t)) / (2 * h), rel=1e-7)
    assert gy == pytest.approx((rest_frame_stream(p, x, y + h, t) - rest_frame_stream(p, x, y - h, t)) / (2 * h), rel=1e-7)


def test_rest_frame_critical_points(p):
    t = 2.0
    pts = rest_frame_critical_points(p, t)
    nf = nodal_point(p, t)
    assert pts[0].x == pytest.approx(nf.x0) and pts[0].y == pytest.approx(nf.y0)
    for cp in pts:
        assert np.allclose(rest_frame_stream_gradient(p, cp.x, cp.y, t), 0, atol=1e-12)
