"""CSV and sidecar-metadata writers shared by the command-line tools."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

SWEEP_HEADER = ("tau", "x_value", "gamma_tau", "gamma_0", "ratio", "regime")


def fmt(value):
    """Nine significant digits; non-finite values as ``nan``/``inf``/``-inf``."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    v = float(value)
    if np.isnan(v):
        return "nan"
    return format(v, ".9g")


def csv_text(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _write(path, text):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def write_text(path, text):
    return _write(path, text)


def write_csv(path, header, rows):
    return _write(path, csv_text(header, rows))


def write_sweep(path, diagram):
    return write_csv(path, SWEEP_HEADER, diagram.rows())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def json_text(payload):
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def write_json(path, payload):
    return _write(path, json_text(payload))


def metadata_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_metadata(path, *, command, config, assumptions=(), extra=None):
    """Sidecar ``<stem>.meta.json`` with the resolved config and tool version."""
    from . import __version__, _jit
    meta = {"tool": "qzeno", "version": __version__, "backend": _jit.backend(), "command": command,
            "config": config, "assumptions": list(assumptions)}
    if extra:
        meta.update(extra)
    return write_json(metadata_path(path), meta)
