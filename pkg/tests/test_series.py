import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bohmchaos import ModelParams
from bohmchaos.integrate import integrate_orbit
from bohmchaos.series import (closed_form_first_order, closed_form_second_order,
                              integral_of_motion_check, series_derivative, series_eval,
                              series_residual, series_solve, term_table)

C = math.sqrt(2) / 2


def _nonconstant(s, n):
    return {(tm.m1, tm.m2): tm.coeff for tm in s.terms(n) if (tm.m1, tm.m2) != (0, 0)}


@pytest.mark.parametrize("x0,y0", [(1.0, 0.0), (0.0, 0.0), (0.5, -0.3), (1.2, 0.8)])
def test_low_orders_match_closed_forms(x0, y0):
    p = ModelParams(0.2, 0.3, C)
    sx, sy = series_solve(p, x0, y0, 2)
    for (got_x, got_y), (ref_x, ref_y) in [
            ((_nonconstant(sx, 1), _nonconstant(sy, 1)), closed_form_first_order(p, x0, y0)),
            ((_nonconstant(sx, 2), _nonconstant(sy, 2)), closed_form_second_order(p, x0, y0))]:
        for got, ref in ((got_x, ref_x), (got_y, ref_y)):
            ref = {k: v for k, v in ref.items() if v != 0}
            assert set(got) == set(ref)
            for k in ref:
                assert got[k] == pytest.approx(ref[k], abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.integers(1, 6))
def test_each_order_vanishes_at_zero(x0, y0, order):
    p = ModelParams(0.3, 0.3, C)
    sx, sy = series_solve(p, x0, y0, order)
    for s in (sx, sy):
        for n in range(1, order + 1):
            assert abs(sum(tm.coeff for tm in s.terms(n))) < 1e-12 * (1 + max((abs(tm.coeff) for tm in s.terms(n)), default=0))
        assert series_eval(s, 0.0) == pytest.approx(s.initial, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(-1, 1, allow_subnormal=False), st.floats(-1, 1, allow_subnormal=False),
       st.floats(0.5, 2.0))
def test_order_n_is_homogeneous_of_degree_n(x0, y0, lam):
    base = series_solve(ModelParams(0.1, 0.15, C), x0, y0, 4)
    scaled = series_solve(ModelParams(0.1 * lam, 0.15 * lam, C), x0, y0, 4)
    for s0, s1 in zip(base, scaled):
        for n in range(1, 5):
            ref = {(tm.m1, tm.m2): tm.coeff * lam ** n for tm in s0.terms(n)}
            got = {(tm.m1, tm.m2): tm.coeff for tm in s1.terms(n)}
            scale = max((abs(v) for v in ref.values()), default=1.0)
            for k in set(ref) | set(got):
                assert got.get(k, 0.0) == pytest.approx(ref.get(k, 0.0), abs=1e-12 * scale + 1e-290)


def test_cosine_only_through_order_ten():
    p = ModelParams(0.5, 0.5, C)
    sx, sy = series_solve(p, 0.0, 0.0, 10)
    assert sx.max_cos_leak < 1e-9
    assert not sx.resonances


def test_converges_to_numerical_orbit_at_small_amplitude():
    p = ModelParams(0.01, 0.01, C)
    tr = integrate_orbit(p, 0.3, 0.2, 50.0, 1e-13)
    errs = []
    for order in (1, 2, 3):
        sx, sy = series_solve(p, 0.3, 0.2, order)
        errs.append(max(np.abs(series_eval(sx, tr.t) - tr.x).max(),
                        np.abs(series_eval(sy, tr.t) - tr.y).max()))
    # each order gains roughly a factor of the amplitude
    assert errs[1] < 0.05 * errs[0] and errs[2] < 0.05 * errs[1]
    assert errs[2] < 1e-6


def test_derivative_by_finite_difference():
    p = ModelParams(0.3, 0.3, C)
    sx, _ = series_solve(p, 0.4, 0.1, 3)
    t, h = np.array([0.7, 3.1, 12.0]), 1e-6
    fd = (series_eval(sx, t + h) - series_eval(sx, t - h)) / (2 * h)
    assert np.allclose(series_derivative(sx, t), fd, atol=1e-8)


def test_residual_scales_cubically():
    t = np.linspace(0, 200, 4001)
    r = []
    for amp in (0.1, 0.2):
        p = ModelParams(amp, amp, C)
        r.append(series_residual(p, *series_solve(p, 1.0, 0.0, 2), t))
    assert 4 <= r[1] / r[0] <= 16


def test_integral_of_motion_drift_small_for_small_amplitude():
    p = ModelParams(0.05, 0.05, C)
    tr = integrate_orbit(p, 1.0, 0.0, 100.0)
    dx, dy = integral_of_motion_check(p, *series_solve(p, 1.0, 0.0, 4), tr)
    assert dx < 1e-4 and dy < 1e-4


def test_term_table_and_errors():
    p = ModelParams(0.2, 0.2, C)
    sx, sy = series_solve(p, 1.0, 0.0, 2)
    rows = term_table(sx, sy)
    assert {r[4] for r in rows} == {"x", "y"}
    assert len(rows) == sum(len(s.terms(n)) for s in (sx, sy) for n in (1, 2))
    assert sx.coefficient(1, 1, 0) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        series_solve(p, 1.0, 0.0, 0)


def test_resonance_recorded_for_commensurate_c():
    # with c = 1 the combination 1 - c is generated and vanishes
    p = ModelParams(0.3, 0.3, 1.0)
    sx, sy = series_solve(p, 0.5, 0.5, 4)
    assert sx.resonances
    for r in sx.resonances:
        assert abs(r.m1 + r.m2) < 1e-12
