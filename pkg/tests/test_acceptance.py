"""Acceptance checks with runtime budgets.

Each test appends one PASS/FAIL line to RESULTS (shown in the pytest terminal
summary) and then asserts. Runtimes exclude one-time JIT compilation, which
a module fixture triggers up front.

    pytest tests/test_acceptance.py -v
"""
import math
import time

import numpy as np
import pytest

from bohmchaos import ModelParams
from bohmchaos.diagnostics import (arrival_times, bin_by_distance, classify_trajectory,
                                   growth_factor, power_law_fit, stretching_series)
from bohmchaos.field import eval_G, eval_psi, nodal_points, psi_gradient, velocity
from bohmchaos.integrate import chi_series, integrate_with_deviation, pair_separation
from bohmchaos.moving import (collision_times, f3_mean, f_means_quadrature, flow_chart, hopf_scan,
                              limit_cycle_find, xpoint_locate, xpoint_sweep)
from bohmchaos.nodal import innermost_minimum, permissible_many
from bohmchaos.series import (closed_form_first_order, closed_form_second_order, series_eval,
                              series_residual, series_solve)

RESULTS = []
P = ModelParams(1.0, 1.0, math.sqrt(2) / 2)
PAIR_START = (-1.1, -1.1)


@pytest.fixture(scope="module", autouse=True)
def warm_jit():
    integrate_with_deviation(P, *PAIR_START, 1.0, 0.0, 0.5)
    xpoint_locate(P, 10.0)
    flow_chart(P, 10.0, length_factor=2.0)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def report(name, ok, detail, elapsed, budget):
    in_time = elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"{status}  {name:<26} {detail}  [{elapsed:.3g} s, budget {budget:g} s]"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def test_innermost_minimum():
    with Timer() as tm:
        X, Y = innermost_minimum()
    ok = abs(X - 0.461226) < 1e-5 and abs(Y - 0.242092) < 1e-5
    report("innermost-minimum", ok, f"(X0, Y0) = ({X:.7f}, {Y:.7f})", tm.elapsed, 1e-3)


def test_bound_containment():
    with Timer() as tm:
        t = np.linspace(0.0, 1000.0, 100_001)[1:]
        x0, y0 = nodal_points(P, t)
        finite = np.isfinite(x0)
        X, Y = np.abs(P.a * x0[finite]), np.abs(P.bsc * y0[finite] / P.a)
        ok_pts = permissible_many(X, Y, tol=1e-9)
    bad = int((~ok_pts).sum())
    report("bound-containment", bad == 0,
           f"{ok_pts.size} sampled nodal points, {bad} outside, {int((~finite).sum())} at infinity",
           tm.elapsed, 5.0)


def test_velocity_oracle():
    rng = np.random.default_rng(2024)
    with Timer() as tm:
        x, y, t = rng.uniform(-3, 3, 30_000), rng.uniform(-3, 3, 30_000), rng.uniform(0, 1000, 30_000)
        safe = eval_G(P, x, y, t) > 1e-3
        x, y, t = x[safe][:10_000], y[safe][:10_000], t[safe][:10_000]
        vx, vy = velocity(P, x, y, t)
        gx, gy = psi_gradient(P, x, y, t)
        psi = eval_psi(P, x, y, t)
        rx, ry = (gx / psi).imag, (gy / psi).imag
        err = np.hypot(vx - rx, vy - ry) / np.maximum(np.hypot(rx, ry), 1e-300)
    report("velocity-oracle", x.size == 10_000 and err.max() < 1e-10,
           f"max relative error {err.max():.2e} over {x.size} points", tm.elapsed, 1.0)


def test_averaging_identities():
    rng = np.random.default_rng(7)
    t0s = []
    while len(t0s) < 100:
        t0 = rng.uniform(0, 1000)
        if abs(math.sin(P.c * t0)) > 0.05 and abs(math.sin((1 + P.c) * t0)) > 0.05:
            t0s.append(t0)
    with Timer() as tm:
        f2_max, f3_rel = 0.0, 0.0
        for t0 in t0s:
            f2, f3q = f_means_quadrature(P, t0)
            f3 = f3_mean(P, t0)
            f2_max = max(f2_max, abs(f2))
            f3_rel = max(f3_rel, abs(f3 - f3q) / abs(f3))
    report("averaging-identities", f2_max < 1e-10 and f3_rel < 1e-6,
           f"max |<f2>| {f2_max:.2e}, max relative <f3> gap {f3_rel:.2e}", tm.elapsed, 2.0)


def test_collision_times():
    with Timer() as tm:
        ts = collision_times(P, 174.0, 177.0)
    ok = len(ts) == 2 and abs(ts[0] - 174.829) < 1e-3 and abs(ts[1] - 176.669) < 1e-3
    report("collision-times", ok, "roots " + ", ".join(f"{t:.5f}" for t in ts), tm.elapsed, 0.1)


def test_hopf_structure():
    with Timer() as tm:
        zeros = [e.t for e in hopf_scan(P, 175.0, 176.5) if e.kind == "f3_zero"]
    report("hopf-structure", len(zeros) == 3,
           f"{len(zeros)} zeros of <f3>: " + ", ".join(f"{t:.5f}" for t in zeros), tm.elapsed, 5.0)


def test_xpoint_saddle_sweep():
    with Timer() as tm:
        found, failed = xpoint_sweep(P, np.linspace(10.0, 1000.0, 100))
        at10 = xpoint_locate(P, 10.0)
    res = max(x.residual for x in found)
    asym = max(x.asymmetry for x in found)
    saddle = all(x.lambda_plus * x.lambda_minus < 0 for x in found)
    ok = not failed and res < 1e-12 and asym < 1e-10 and saddle and abs(at10.d0 - 0.9) <= 0.1
    report("xpoint-saddle-sweep", ok,
           f"{len(found)} found, {len(failed)} failed, max residual {res:.1e}, "
           f"max asymmetry {asym:.1e}, d0(10) = {at10.d0:.4f}", tm.elapsed, 10.0)


def test_eigenvalue_scaling():
    with Timer() as tm:
        found, failed = xpoint_sweep(P, np.linspace(1.0, 1000.0, 1000))
        fit = power_law_fit([x.d0 for x in found], [x.lambda_plus for x in found])
    report("eigenvalue-scaling", 1.2 <= fit.exponent <= 1.9,
           f"exponent {fit.exponent:.4f} from {fit.n} X-points ({len(failed)} not found)",
           tm.elapsed, 30.0)


def test_lyapunov_plateau():
    with Timer() as tm:
        tr = integrate_with_deviation(P, *PAIR_START, 1.0, 0.0, 5000.0)
        chi = chi_series(tr)[1][-1]
    report("lyapunov-plateau", 0.015 <= chi <= 0.06, f"chi(5000) = {chi:.5f}", tm.elapsed, 120.0)


def test_orbit_classification():
    expected = {(0.75, 0.25): "regular", (1.0, 1.0): "regular", (1.4, 1.4): "chaotic"}
    got = {}
    with Timer() as tm:
        for start in expected:
            got[start] = classify_trajectory(integrate_with_deviation(P, *start, 1.0, 0.0, 1000.0))
    report("orbit-classification", got == expected,
           ", ".join(f"{s}: {c}" for s, c in got.items()), tm.elapsed, 60.0)


def test_separation_staircase():
    with Timer() as tm:
        t, dS = pair_separation(P, PAIR_START, (PAIR_START[0] + 1e-4, PAIR_START[1]), 200.0,
                                dt_out=0.01)
        arrivals = arrival_times(t, dS, (1e-3, 1e-2, 1e-1))
        factor = growth_factor(t, dS, 175.2, 176.3)
    on_time = all(abs(a - ref) <= 15 for a, ref in zip(arrivals, (25, 90, 170)))
    report("separation-staircase", on_time and 2 <= factor <= 5,
           "arrivals " + ", ".join(f"{a:.2f}" for a in arrivals)
           + f"; growth over [175.2, 176.3] x{factor:.3f}", tm.elapsed, 60.0)


def test_encounter_statistics():
    with Timer() as tm:
        tr = integrate_with_deviation(P, *PAIR_START, 1.0, 0.0, 1000.0, dt_out=0.01)
        win = stretching_series(P, tr, 0.1)
        by_d = [b for b in bin_by_distance(win, "d", 0.025) if b.bin_center <= 0.25]
        by_eps = [b for b in bin_by_distance(win, "eps", 0.025) if b.bin_center < 0.25]
    neg_d = [f"{b.bin_center:.3f}: {b.mean_a:+.2f} (n={b.count})" for b in by_d if b.mean_a <= 0]
    signs = {np.sign(b.mean_a) for b in by_eps}
    ok = not neg_d and {-1.0, 1.0} <= signs
    detail = (f"{len(by_d)} d-bins, non-positive: [{'; '.join(neg_d)}]; "
              f"eps-bins signs {sorted(int(s) for s in signs)}")
    report("encounter-statistics", ok, detail, tm.elapsed, 120.0)


def test_series_properties():
    C = P.c
    with Timer() as tm:
        worst = 0.0
        p_small = ModelParams(0.2, 0.3, C)
        for x0, y0 in ((1.0, 0.0), (0.0, 0.0), (0.5, -0.3)):
            sx, sy = series_solve(p_small, x0, y0, 2)
            for n, refs in ((1, closed_form_first_order(p_small, x0, y0)),
                            (2, closed_form_second_order(p_small, x0, y0))):
                for s, ref in zip((sx, sy), refs):
                    got = {(tm_.m1, tm_.m2): tm_.coeff for tm_ in s.terms(n) if (tm_.m1, tm_.m2) != (0, 0)}
                    for k in set(got) | set(ref):
                        worst = max(worst, abs(got.get(k, 0.0) - ref.get(k, 0.0)))
        p_big = ModelParams(0.5, 0.5, C)
        sx10, sy10 = series_solve(p_big, 0.0, 0.0, 10)
        at_zero = max(abs(sum(tm_.coeff for tm_ in s.terms(n))) for s in (sx10, sy10) for n in range(1, 11))
        leak = max(sx10.max_cos_leak, sy10.max_cos_leak)
        t = np.linspace(0, 200, 4001)
        r = [series_residual(ModelParams(a, a, C), *series_solve(ModelParams(a, a, C), 1.0, 0.0, 2), t)
             for a in (0.1, 0.2)]
        ratio = r[1] / r[0]
        r4 = series_residual(p_big, *series_solve(p_big, 0.0, 0.0, 4), t)
        r10 = series_residual(p_big, sx10, sy10, t)
        x_at_zero = abs(series_eval(sx10, 0.0) - 0.0)
    ok = worst < 1e-14 and at_zero < 1e-12 and x_at_zero < 1e-12 and leak < 1e-9 \
        and 4 <= ratio <= 16 and r10 < r4
    report("series-properties", ok,
           f"coefficient gap {worst:.1e}, order sums at t=0 {at_zero:.1e}, cos leak {leak:.1e}, "
           f"residual ratio {ratio:.2f}, residual order 4 / 10: {r4:.4f} / {r10:.4f}",
           tm.elapsed, 30.0)


def _topology(t_stable, t_unstable, t_present, t_absent):
    a = flow_chart(P, t_stable)
    b = flow_chart(P, t_unstable)
    present = limit_cycle_find(P, t_present)
    absent = limit_cycle_find(P, t_absent)
    kinds = (a.spiral_kind if a.spiral_index >= 0 else "none",
             b.spiral_kind if b.spiral_index >= 0 else "none")
    ok = kinds == ("stable", "unstable") and present is not None and absent is None
    return ok, kinds, present, absent


def test_flow_chart_topology():
    with Timer() as tm:
        ok, kinds, present, absent = _topology(175.7, 175.8, 175.76, 175.78)
        interval = "175.70-175.80"
        if not ok:
            ok, kinds, present, absent = _topology(176.7, 176.8, 176.76, 176.78)
            interval = "176.70-176.80" if ok else "neither"
    detail = (f"interval {interval}: spiral joins {kinds[0]} / {kinds[1]} branch; cycle "
              f"{'present r=%.4f' % present.radius if present else 'absent'} / "
              f"{'present' if absent else 'absent'}")
    report("flow-chart-topology", ok, detail, tm.elapsed, 60.0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
