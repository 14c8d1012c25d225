"""CSV and manifest writers.

CSV files have a header row, ',' separators, '.' decimals and 17 significant
digits, so every double survives a write/read round trip. The manifest is a
JSON document::

    {"config": "<serialized config>", "command": ..., "versions": {...},
     "outputs": {"name.csv": {"sha256": ..., "rows": n}}, "summary": {...},
     "timestamp": "<UTC ISO-8601>"}
"""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
import os
import platform
from pathlib import Path

import numpy as np

OUTDIR_ENV = "BOHMCHAOS_OUTDIR"
DEFAULT_OUTDIR = "bohmchaos-out"


def default_outdir() -> str:
    return os.environ.get(OUTDIR_ENV, DEFAULT_OUTDIR)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def write_csv(path, header, columns) -> dict:
    """Write equal-length columns under a header; returns {'sha256', 'rows'}."""
    cols = [np.asarray(c) if not isinstance(c, list) else c for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(_cell(c[i]) for c in cols))
    data = ("\n".join(lines) + "\n").encode("ascii")
    Path(path).write_bytes(data)
    return {"sha256": hashlib.sha256(data).hexdigest(), "rows": n}


def read_csv(path):
    """Read a CSV written by write_csv into a dict of float arrays."""
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    out = {}
    for j, name in enumerate(header):
        col = [r[j] for r in rows]
        try:
            out[name] = np.array([float(x) for x in col])
        except ValueError:
            out[name] = col
    return out


def versions() -> dict:
    import numba
    import scipy

    from . import __version__
    return {"bohmchaos": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_manifest(outdir, config_text: str, command: str, outputs: dict, summary: dict) -> Path:
    doc = {
        "command": command,
        "config": config_text,
        "versions": versions(),
        "outputs": outputs,
        "summary": _jsonable(summary),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    path = Path(outdir) / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
