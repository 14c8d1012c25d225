"""Run configuration: schema, key-value file format and figure recipes.

A config file is INI-style text with three sections::

    [run]
    command = orbit
    output = runs/fig3c

    [params]
    a = 1.0
    b = 1.0
    c = sqrt2/2
    tol = 1e-12

    [options]
    x0 = 1.4
    y0 = 1.4
    t_max = 1000.0
    deviation = true

Option names and types depend on the command (see COMMANDS). Floats are
written with repr, so parse(serialize(cfg)) == cfg exactly.
"""
from __future__ import annotations

import configparser
import io
import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .errors import ConfigError, UnknownRecipe
from .field import ModelParams

# command -> option -> (type, default, help)
COMMANDS = {
    "orbit": {
        "x0": (float, 0.75, "initial x"),
        "y0": (float, 0.25, "initial y"),
        "t_max": (float, 1000.0, "final time"),
        "dt_out": (float, 0.1, "output sampling step"),
        "deviation": (bool, False, "evolve a deviation vector and report chi(t)"),
    },
    "series": {
        "x0": (float, 1.0, "initial x"),
        "y0": (float, 0.0, "initial y"),
        "order": (int, 2, "perturbation order"),
        "t_max": (float, 1000.0, "final time of the sampled orbit"),
        "dt_out": (float, 0.1, "output sampling step"),
        "numeric": (bool, True, "also integrate the orbit numerically for comparison"),
    },
    "nodal-lines": {
        "t_min": (float, 0.0, "first sample time"),
        "t_max": (float, 1000.0, "last sample time"),
        "dt": (float, 0.01, "sampling step"),
    },
    "bounds": {
        "y_max": (float, 4.0, "largest |Y0| tabulated"),
        "n": (int, 801, "number of |Y0| values"),
    },
    "xpoints": {
        "t_min": (float, 0.0, "sweep start (excluded)"),
        "t_max": (float, 1000.0, "sweep end"),
        "n": (int, 1000, "number of sweep times"),
    },
    "flowchart": {
        "t0": (float, 10.0, "frozen time"),
        "length_factor": (float, 60.0, "branch arc length in units of d0"),
        "limit_cycle": (bool, False, "also search for a limit cycle"),
    },
    "hopf": {
        "t_lo": (float, 175.0, "scan start"),
        "t_hi": (float, 176.5, "scan end"),
        "step": (float, 0.01, "grid step before root refinement"),
    },
    "lyapunov": {
        "x0": (float, -1.1, "initial x"),
        "y0": (float, -1.1, "initial y"),
        "t_max": (float, 1000.0, "final time"),
        "window": (float, 0.1, "stretching-number window"),
        "pair_dx": (float, 0.0, "if non-zero, also track a partner orbit offset in x"),
    },
    "encounters": {
        "x0": (float, -1.1, "initial x"),
        "y0": (float, -1.1, "initial y"),
        "t_max": (float, 1000.0, "final time"),
        "window": (float, 0.1, "stretching-number window"),
        "sub_dt": (float, 0.01, "sampling step for in-window minima"),
        "delta": (float, 2.5e-2, "bin width"),
    },
}

PARAM_DEFAULTS = {"a": 1.0, "b": 1.0, "c": "sqrt2/2", "tol": 1e-12}

_SQRT_RE = re.compile(r"^\s*sqrt\(?\s*(\d+(?:\.\d*)?)\s*\)?\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_c(token) -> float:
    """Frequency ratio from a number, a rational 'p/q' or 'sqrtN[/q]'."""
    if isinstance(token, (int, float)):
        return float(token)
    text = str(token).strip().lower()
    m = _SQRT_RE.match(text)
    if m:
        value = math.sqrt(float(m.group(1)))
        return value / float(m.group(2)) if m.group(2) else value
    try:
        if "/" in text:
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse c={token!r}") from exc


def _to_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _coerce(kind, value, name):
    try:
        if kind is bool:
            return value if isinstance(value, bool) else _to_bool(str(value))
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"option {name}: cannot convert {value!r} to {kind.__name__}") from exc


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    command: str
    a: float = 1.0
    b: float = 1.0
    c: str = "sqrt2/2"
    tol: float = 1e-12
    options: dict = field(default_factory=dict)
    output: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        schema = COMMANDS[self.command]
        unknown = set(self.options) - set(schema)
        if unknown:
            raise ConfigError(f"unknown option(s) for {self.command}: {sorted(unknown)}")
        opts = {k: _coerce(kind, self.options.get(k, default), k)
                for k, (kind, default, _) in schema.items()}
        object.__setattr__(self, "options", opts)
        object.__setattr__(self, "a", _coerce(float, self.a, "a"))
        object.__setattr__(self, "b", _coerce(float, self.b, "b"))
        object.__setattr__(self, "tol", _coerce(float, self.tol, "tol"))
        object.__setattr__(self, "c", str(self.c))
        if not 1e-13 <= self.tol <= 1e-6:
            raise ConfigError("tol must lie in [1e-13, 1e-6]")
        try:
            self.params
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.a, self.b, parse_c(self.c))

    def opt(self, name):
        return self.options[name]

    def with_output(self, output):
        return replace(self, output=output)


def serialize(cfg: RunConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp["run"] = {"command": cfg.command}
    if cfg.output is not None:
        cp["run"]["output"] = cfg.output
    cp["params"] = {"a": _fmt(cfg.a), "b": _fmt(cfg.b), "c": cfg.c, "tol": _fmt(cfg.tol)}
    cp["options"] = {k: _fmt(v) for k, v in cfg.options.items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def parse(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if not cp.has_section("run") or "command" not in cp["run"]:
        raise ConfigError("config needs [run] command = ...")
    params = dict(PARAM_DEFAULTS)
    if cp.has_section("params"):
        extra = set(cp["params"]) - set(PARAM_DEFAULTS)
        if extra:
            raise ConfigError(f"unknown parameter(s): {sorted(extra)}")
        params.update(cp["params"])
    options = dict(cp["options"]) if cp.has_section("options") else {}
    return RunConfig(cp["run"]["command"], params["a"], params["b"], params["c"], params["tol"],
                     options, cp["run"].get("output"))


def load(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


_PAIR = dict(x0=-1.1, y0=-1.1)

RECIPES = {
    "fig1a": ("nodal-lines", dict(c="7/10"), dict(t_max=1000.0)),
    "fig1b": ("nodal-lines", {}, dict(t_max=1000.0)),
    "fig2a": ("bounds", {}, {}),
    "fig2b": ("bounds", {}, {}),
    "fig2c": ("bounds", {}, {}),
    "fig2d": ("bounds", {}, {}),
    "fig2e": ("nodal-lines", {}, dict(t_max=1000.0)),
    "fig3a": ("orbit", {}, dict(x0=0.75, y0=0.25, deviation=True)),
    "fig3b": ("orbit", {}, dict(x0=1.0, y0=1.0, deviation=True)),
    "fig3c": ("orbit", {}, dict(x0=1.4, y0=1.4, deviation=True)),
    "fig4a": ("series", dict(a=0.2, b=0.2), dict(x0=1.0, y0=0.0, order=2)),
    "fig4b": ("series", dict(a=0.2, b=0.2), dict(x0=1.0, y0=0.0, order=2)),
    "fig4c": ("series", dict(a=0.2, b=0.2), dict(x0=1.0, y0=0.0, order=2)),
    "fig4d": ("series", dict(a=0.2, b=0.2), dict(x0=0.0, y0=0.0, order=2)),
    "fig4e": ("series", dict(a=0.2, b=0.2), dict(x0=0.0, y0=0.0, order=2)),
    "fig4f": ("series", dict(a=0.2, b=0.2), dict(x0=0.0, y0=0.0, order=2)),
    "fig5a": ("series", dict(a=0.5, b=0.5), dict(x0=0.0, y0=0.0, order=10)),
    "fig5b": ("series", dict(a=0.5, b=0.5), dict(x0=0.0, y0=0.0, order=10)),
    "fig5c": ("series", dict(a=0.5, b=0.5), dict(x0=0.5, y0=0.0, order=10)),
    "fig5d": ("series", dict(a=0.5, b=0.5), dict(x0=0.5, y0=0.0, order=10)),
    "fig6": ("flowchart", {}, dict(t0=10.0)),
    "fig7a": ("nodal-lines", {}, dict(t_max=1000.0)),
    "fig7b": ("xpoints", {}, dict(t_max=1000.0, n=10000)),
    "fig7c": ("xpoints", {}, dict(t_max=1000.0, n=1000)),
    "fig8a": ("orbit", {}, dict(_PAIR, t_max=1000.0)),
    "fig8b": ("orbit", {}, dict(_PAIR, t_max=5000.0, deviation=True)),
    "fig9a": ("lyapunov", {}, dict(_PAIR, t_max=1000.0, pair_dx=1e-4)),
    "fig9b": ("lyapunov", {}, dict(_PAIR, t_max=180.0, pair_dx=1e-4)),
    "fig10a": ("flowchart", {}, dict(t0=175.2)),
    "fig10b": ("flowchart", {}, dict(t0=175.5)),
    "fig10c": ("flowchart", {}, dict(t0=175.7)),
    "fig10d": ("flowchart", {}, dict(t0=175.8)),
    "fig10e": ("flowchart", {}, dict(t0=176.0)),
    "fig10f": ("flowchart", {}, dict(t0=176.3)),
    "fig11a": ("hopf", {}, dict(t_lo=175.0, t_hi=176.5)),
    "fig11b": ("hopf", {}, dict(t_lo=175.0, t_hi=176.5)),
    "fig12a": ("flowchart", {}, dict(t0=175.70, limit_cycle=True)),
    "fig12b": ("flowchart", {}, dict(t0=175.76, limit_cycle=True)),
    "fig12c": ("flowchart", {}, dict(t0=175.775, limit_cycle=True)),
    "fig12d": ("flowchart", {}, dict(t0=175.78, limit_cycle=True)),
    "fig13a": ("lyapunov", {}, dict(_PAIR, t_max=1000.0)),
    "fig13b": ("encounters", {}, dict(_PAIR, t_max=1000.0, delta=2.5e-2, window=0.1)),
}


def figure_recipe(name: str) -> RunConfig:
    """Canonical config whose outputs hold the data behind a figure panel."""
    try:
        command, params, options = RECIPES[name.lower()]
    except KeyError:
        raise UnknownRecipe(name) from None
    return RunConfig(command, options=dict(options), **params)


__all__ = ["COMMANDS", "RunConfig", "parse_c", "serialize", "parse", "load", "RECIPES",
           "figure_recipe"]
