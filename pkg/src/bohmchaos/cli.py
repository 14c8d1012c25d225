"""Command-line front end.

    bohmchaos <command> [options]        run one computation
    bohmchaos run --config FILE          run from a key-value config file
    bohmchaos recipe NAME [--print]      run (or print) the config for a figure panel

Every run writes CSV tables plus manifest.json into the output directory
(--out, else $BOHMCHAOS_OUTDIR, else ./bohmchaos-out). Exit status: 0 on
success, 2 on a usage or config error, 3 on a numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import config as C
from .errors import BohmChaosError, ConfigError, NumericalError
from .output import default_outdir, write_csv, write_manifest

log = logging.getLogger("bohmchaos")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


# command handlers: (cfg, outdir) -> (outputs, summary)

def _orbit(cfg, out):
    from .integrate import chi_series, integrate_orbit, integrate_with_deviation
    p, o = cfg.params, cfg.options
    if o["deviation"]:
        tr = integrate_with_deviation(p, o["x0"], o["y0"], 1.0, 0.0, o["t_max"], cfg.tol, o["dt_out"])
        _, chi = chi_series(tr)
        chi = np.concatenate([[np.nan], chi])
        lx = tr.log_xi()
        dx, dy = tr.dx * np.exp(tr.log_scale), tr.dy * np.exp(tr.log_scale)
        files = {"orbit.csv": write_csv(out / "orbit.csv", ["t", "x", "y", "dx", "dy", "chi"],
                                        [tr.t, tr.x, tr.y, dx, dy, chi])}
        summary = {"chi_end": float(chi[-1]), "log_xi_end": float(lx[-1] - lx[0])}
    else:
        tr = integrate_orbit(p, o["x0"], o["y0"], o["t_max"], cfg.tol, o["dt_out"])
        files = {"orbit.csv": write_csv(out / "orbit.csv", ["t", "x", "y"], [tr.t, tr.x, tr.y])}
        summary = {}
    summary.update(tr.stats)
    return files, summary


def _series(cfg, out):
    from .integrate import integrate_orbit
    from .series import series_eval, series_residual, series_solve, term_table
    p, o = cfg.params, cfg.options
    sx, sy = series_solve(p, o["x0"], o["y0"], o["order"])
    rows = term_table(sx, sy)
    files = {"series_terms.csv": write_csv(
        out / "series_terms.csv", ["order", "m1", "m2", "coeff", "axis"],
        [[r[i] for r in rows] for i in range(5)])}
    n = int(math.floor(o["t_max"] / o["dt_out"] + 1e-9)) + 1
    t = o["dt_out"] * np.arange(n)
    xs, ys = series_eval(sx, t), series_eval(sy, t)
    if o["numeric"]:
        tr = integrate_orbit(p, o["x0"], o["y0"], o["t_max"], cfg.tol, o["dt_out"])
        xn, yn = tr.x[:n], tr.y[:n]
    else:
        xn = yn = np.full(n, np.nan)
    files["series_orbit.csv"] = write_csv(
        out / "series_orbit.csv", ["t", "x_series", "y_series", "x_numeric", "y_numeric"],
        [t, xs, ys, xn, yn])
    summary = {"terms": len(rows), "residual": series_residual(p, sx, sy, t),
               "resonances_dropped": len(sx.resonances)}
    if o["numeric"]:
        summary["max_deviation"] = float(max(np.max(np.abs(xs - xn)), np.max(np.abs(ys - yn))))
    return files, summary


def _nodal_lines(cfg, out):
    from .nodal import nodal_lines_sample, permissible_many
    p, o = cfg.params, cfg.options
    s = nodal_lines_sample(p, o["t_min"], o["t_max"], o["dt"])
    X, Y = s.scaled(p)
    ok = permissible_many(np.abs(X), np.abs(Y))
    files = {"nodal_lines.csv": write_csv(out / "nodal_lines.csv",
                                          ["t", "x0", "y0", "X0", "Y0", "permissible"],
                                          [s.t, s.x0, s.y0, X, Y, ok])}
    return files, {"points": len(s.t), "skipped": s.skipped,
                   "not_permissible": int((~ok).sum())}


def _bounds(cfg, out):
    from .errors import EmptyInterval
    from .nodal import bounds_case, innermost_minimum
    o = cfg.options
    Ys = np.linspace(0.0, o["y_max"], o["n"])
    cols = {k: [] for k in ("absY0", "case", "lo", "hi")}
    for Y in Ys:
        for case in "ABCD":
            try:
                lo, hi = bounds_case(case, Y)[0]
            except EmptyInterval:
                continue
            cols["absY0"].append(Y)
            cols["case"].append(case)
            cols["lo"].append(lo)
            cols["hi"].append(hi)
    files = {"bounds.csv": write_csv(out / "bounds.csv", list(cols), list(cols.values()))}
    X, Y = innermost_minimum()
    return files, {"X0min": X, "Y0min": Y}


def _xpoints(cfg, out):
    from .diagnostics import power_law_fit
    from .moving import xpoint_sweep
    p, o = cfg.params, cfg.options
    ts = np.linspace(o["t_min"], o["t_max"], o["n"] + 1)[1:]
    found, failed = xpoint_sweep(p, ts)
    cols = [[getattr(x, k) for x in found] for k in ("t0", "u0", "v0", "d0", "lambda_plus", "lambda_minus")]
    files = {"xpoints.csv": write_csv(out / "xpoints.csv",
                                      ["t0", "u0", "v0", "d0", "lambda_plus", "lambda_minus"], cols)}
    summary = {"found": len(found), "failed": len(failed)}
    if len(found) >= 20:
        fit = power_law_fit(cols[3], cols[4])
        summary.update(exponent=fit.exponent, prefactor=fit.prefactor)
    return files, summary


def _flowchart(cfg, out):
    from .moving import flow_chart, limit_cycle_find
    p, o = cfg.params, cfg.options
    fc = flow_chart(p, o["t0"], length_factor=o["length_factor"])
    cols = {k: [] for k in ("branch", "kind", "side", "spiral", "u", "v")}
    for i, br in enumerate(fc.branches):
        n = len(br.points)
        cols["branch"] += [i] * n
        cols["kind"] += [br.kind] * n
        cols["side"] += [br.side] * n
        cols["spiral"] += [i == fc.spiral_index] * n
        cols["u"] += br.points[:, 0].tolist()
        cols["v"] += br.points[:, 1].tolist()
    files = {"flowchart.csv": write_csv(out / "flowchart.csv", list(cols), list(cols.values()))}
    xp = fc.xpoint
    summary = {"t0": fc.t0, "node": fc.node, "f3": fc.f3, "u0": xp.u0, "v0": xp.v0, "d0": xp.d0,
               "lambda_plus": xp.lambda_plus, "lambda_minus": xp.lambda_minus,
               "spiral_branch": None if fc.spiral_index < 0 else fc.spiral_kind,
               "windings": [b.winding for b in fc.branches]}
    if o["limit_cycle"]:
        lc = limit_cycle_find(p, o["t0"])
        summary["limit_cycle_radius"] = None if lc is None else lc.radius
    return files, summary


def _hopf(cfg, out):
    from .errors import NodalAtInfinity
    from .field import nodal_point
    from .moving import f3_mean, hopf_scan
    p, o = cfg.params, cfg.options
    events = hopf_scan(p, o["t_lo"], o["t_hi"], o["step"])
    files = {"hopf_events.csv": write_csv(out / "hopf_events.csv", ["t", "kind"],
                                          [[e.t for e in events], [e.kind for e in events]])}
    n = int(round((o["t_hi"] - o["t_lo"]) / o["step"])) + 1
    grid = np.linspace(o["t_lo"], o["t_hi"], n)
    y0, f3 = [], []
    for t in grid:
        try:
            y0.append(nodal_point(p, t).y0)
            f3.append(f3_mean(p, t))
        except NodalAtInfinity:
            y0.append(math.nan)
            f3.append(math.nan)
    files["hopf_scan.csv"] = write_csv(out / "hopf_scan.csv", ["t0", "y0", "f3"], [grid, y0, f3])
    return files, {"f3_zeros": [e.t for e in events if e.kind == "f3_zero"],
                   "collisions": [e.t for e in events if e.kind == "collision"]}


def _lyapunov(cfg, out):
    from .diagnostics import arrival_times, classify_orbit, stretching_series
    from .integrate import chi_series, integrate_with_deviation, pair_separation
    p, o = cfg.params, cfg.options
    tr = integrate_with_deviation(p, o["x0"], o["y0"], 1.0, 0.0, o["t_max"], cfg.tol, o["window"])
    t, chi = chi_series(tr)
    files = {"chi.csv": write_csv(out / "chi.csv", ["t", "chi"], [t, chi])}
    win = stretching_series(p, tr, o["window"], distances=False)
    files["stretching.csv"] = write_csv(out / "stretching.csv", ["t_i", "a_i"],
                                        [[w.t_i for w in win], [w.a_i for w in win]])
    summary = {"chi_end": float(chi[-1])}
    if t[-1] >= 1000:
        summary["class"] = classify_orbit(t, chi)
    if o["pair_dx"]:
        ts, dS = pair_separation(p, (o["x0"], o["y0"]), (o["x0"] + o["pair_dx"], o["y0"]),
                                 o["t_max"], cfg.tol, 0.01)
        files["separation.csv"] = write_csv(out / "separation.csv", ["t", "dS"], [ts, dS])
        summary["arrival_1e-3_1e-2_1e-1"] = arrival_times(ts, dS)
    return files, summary


def _encounters(cfg, out):
    from .diagnostics import bin_by_distance, stretching_series
    from .integrate import integrate_with_deviation
    p, o = cfg.params, cfg.options
    tr = integrate_with_deviation(p, o["x0"], o["y0"], 1.0, 0.0, o["t_max"], cfg.tol, o["sub_dt"])
    win = stretching_series(p, tr, o["window"])
    cols = [[getattr(w, k) for w in win] for k in ("t_i", "a_i", "eps_min", "d_min", "d0_min")]
    files = {"windows.csv": write_csv(out / "windows.csv",
                                      ["t_i", "a_i", "eps_min", "d_min", "d0_min"], cols)}
    summary = {"windows": len(win)}
    for which in ("d", "eps"):
        bins = bin_by_distance(win, which, o["delta"])
        name = f"bins_{which}.csv"
        files[name] = write_csv(out / name, ["bin_center", "mean_a", "count"],
                                [[b.bin_center for b in bins], [b.mean_a for b in bins],
                                 [b.count for b in bins]])
        summary[f"binned_{which}"] = sum(b.count for b in bins)
    return files, summary


HANDLERS = {
    "orbit": _orbit, "series": _series, "nodal-lines": _nodal_lines, "bounds": _bounds,
    "xpoints": _xpoints, "flowchart": _flowchart, "hopf": _hopf, "lyapunov": _lyapunov,
    "encounters": _encounters,
}


def run(cfg: C.RunConfig) -> int:
    """Execute a config; returns the process exit status."""
    outdir = Path(cfg.output or default_outdir())
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("cannot create output directory %s: %s", outdir, exc)
        return EXIT_CONFIG
    try:
        files, summary = HANDLERS[cfg.command](cfg, outdir)
    except NumericalError as exc:
        log.error("%s failed: %s: %s", cfg.command, type(exc).__name__, exc)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        log.error("%s: invalid input: %s", cfg.command, exc)
        return EXIT_CONFIG
    write_manifest(outdir, C.serialize(cfg), cfg.command, files, summary)
    log.info("wrote %s to %s", ", ".join(files), outdir)
    return EXIT_OK


def _flag(name):
    return "--" + name.replace("_", "-")


def _add_common(sp):
    g = sp.add_argument_group("model")
    g.add_argument("--a", type=float, default=C.PARAM_DEFAULTS["a"])
    g.add_argument("--b", type=float, default=C.PARAM_DEFAULTS["b"])
    g.add_argument("--c", default=C.PARAM_DEFAULTS["c"],
                   help="frequency ratio: number, p/q or sqrt2/2 (default %(default)s)")
    g.add_argument("--tol", type=float, default=C.PARAM_DEFAULTS["tol"])
    sp.add_argument("--out", default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bohmchaos", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", metavar="command")
    for name, schema in C.COMMANDS.items():
        sp = sub.add_parser(name)
        _add_common(sp)
        for opt, (kind, default, help_) in schema.items():
            if kind is bool:
                sp.add_argument(_flag(opt), dest=opt, action=argparse.BooleanOptionalAction,
                                default=default, help=help_)
            else:
                sp.add_argument(_flag(opt), dest=opt, type=kind, default=default,
                                help=f"{help_} (default {default})")
    rp = sub.add_parser("run", help="run from a config file")
    rp.add_argument("--config", required=True)
    rp.add_argument("--out", default=None)
    fp = sub.add_parser("recipe", help="run the canned config of a figure panel")
    fp.add_argument("name", help="fig1a ... fig13b")
    fp.add_argument("--out", default=None)
    fp.add_argument("--print", dest="print_only", action="store_true",
                    help="print the config instead of running it")
    return ap


def config_from_args(ns) -> C.RunConfig:
    if ns.command == "run":
        cfg = C.load(ns.config)
        return cfg.with_output(ns.out) if ns.out else cfg
    if ns.command == "recipe":
        cfg = C.figure_recipe(ns.name)
        return cfg.with_output(ns.out) if ns.out else cfg
    opts = {k: getattr(ns, k) for k in C.COMMANDS[ns.command]}
    return C.RunConfig(ns.command, ns.a, ns.b, ns.c, ns.tol, opts, ns.out)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = config_from_args(ns)
    except (BohmChaosError, OSError) as exc:
        print(f"bohmchaos: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(ns, "print_only", False):
        sys.stdout.write(C.serialize(cfg))
        return EXIT_OK
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
