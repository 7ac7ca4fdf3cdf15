"""JSON run configuration: schema, defaults and conversion to model objects.

A config describes the baths plus the knobs of one command. Validation
runs the JSON schema first and then the checks a schema cannot express
(``min < max`` on axes, physical constraints of the bath models). Every
failure is reported as ``source:line: field: message``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, replace
from json.decoder import scanstring

import jsonschema
import numpy as np

from .errors import DomainError
from .quad import QuadSpec
from .renorm import CAVITY_REFERENCES, renormalize
from .spectra import CompositeSpectrum, Lorentzian, LowFrequency, OhmicDrude
from .zeno import X_PARAMS, SystemTemplate

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_COUNT = {"type": "integer", "minimum": 1}


def _obj(props, required=(), **extra):
    out = {"type": "object", "additionalProperties": False, "properties": props}
    if required:
        out["required"] = list(required)
    out.update(extra)
    return out


_LORENTZIAN = _obj(
    {
        "type": {"const": "lorentzian"},
        "g": {**_NONNEG, "description": "coupling; the line integrates to g**2"},
        "omega_cav": {**_POS, "description": "cavity centre frequency"},
        "lambda": {**_POS, "description": "half width at half maximum"},
        "q_factor": {"type": "number", "exclusiveMinimum": 1, "description": "omega_cav / lambda"},
    },
    ("type", "g", "omega_cav"),
    oneOf=[{"required": ["lambda"]}, {"required": ["q_factor"]}],
)
_LOW = _obj({"type": {"const": "low_frequency"}, "alpha": _NONNEG, "omega_low": _POS},
            ("type", "alpha", "omega_low"))
_OHMIC = _obj({"type": {"const": "ohmic"}, "alpha": _NONNEG, "omega_c": _POS},
              ("type", "alpha", "omega_c"))

_AXIS = {
    "type": "array",
    "prefixItems": [{"type": "number"}, {"type": "number"}, _COUNT, {"type": "boolean"}],
    "minItems": 3,
    "maxItems": 4,
    "description": "[min, max, count] or [min, max, count, log]",
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "qzeno run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["baths"],
    "properties": {
        "delta": {**_POS, "default": 1.0, "description": "bare qubit spacing; the energy unit"},
        "baths": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["type"],
                "properties": {"type": {"enum": ["lorentzian", "low_frequency", "ohmic"]}},
                "allOf": [
                    {"if": {"properties": {"type": {"const": "lorentzian"}}}, "then": _LORENTZIAN},
                    {"if": {"properties": {"type": {"const": "low_frequency"}}}, "then": _LOW},
                    {"if": {"properties": {"type": {"const": "ohmic"}}}, "then": _OHMIC},
                ],
            },
        },
        "coupling_scale": {**_POS, "default": 1.0},
        "rwa_mode": {"type": "boolean", "default": False},
        "cavity_reference": {"enum": list(CAVITY_REFERENCES), "default": "renormalized"},
        "per_bath_f": {"type": "boolean", "default": False},
        "tau": {**_POS, "default": 5.0, "description": "measurement interval for rate and oracle"},
        "workers": {**_COUNT, "default": 1},
        "quad": _obj({"rel_tol": _POS, "abs_tol": _POS, "max_subdivisions": _COUNT}),
        "sweep": _obj({"tau": _AXIS, "x_param": {"enum": list(X_PARAMS)}, "x": _AXIS},
                      ("tau", "x_param", "x")),
        "dynamics": _obj({"tau": _POS, "n_measurements": _COUNT, "t_max": _POS, "n_times": _COUNT}),
        "oracle": _obj({"K": _COUNT, "omega_max": _POS, "n": _COUNT,
                        "scheme": {"enum": ["uniform", "peak-refined"]}}),
        "poles": _obj({"window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                       "n_brackets": _COUNT}),
    },
}

_DEFAULTS = {
    "delta": 1.0,
    "coupling_scale": 1.0,
    "rwa_mode": False,
    "cavity_reference": "renormalized",
    "per_bath_f": False,
    "tau": 5.0,
    "workers": 1,
}
_QUAD = QuadSpec()
_SECTION_DEFAULTS = {
    "quad": {"rel_tol": _QUAD.rel_tol, "abs_tol": _QUAD.abs_tol, "max_subdivisions": _QUAD.max_subdivisions},
    "dynamics": {"n_measurements": 20, "n_times": 201},
    "oracle": {"K": 4000, "omega_max": 40.0, "n": 20, "scheme": "peak-refined"},
    "poles": {"n_brackets": 200},
}


class ConfigError(ValueError):
    """Invalid configuration; ``diagnostics`` holds one line per problem."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))


# -- locating a field in the source text -----------------------------------------------------

_WS = " \t\r\n"
_DECODER = json.JSONDecoder()


def _skip(text, i):
    while i < len(text) and text[i] in _WS:
        i += 1
    return i


def _child_offset(text, i, key):
    """Offset of the value under ``key`` in the container starting at ``i``, or None."""
    i = _skip(text, i)
    if i >= len(text) or text[i] not in "[{":
        return None
    is_obj = text[i] == "{"
    i += 1
    idx = 0
    while True:
        i = _skip(text, i)
        if i >= len(text) or text[i] in "]}":
            return None
        name = None
        if is_obj:
            name, i = scanstring(text, i + 1)
            i = _skip(text, i) + 1
            i = _skip(text, i)
        if (is_obj and name == key) or (not is_obj and idx == key):
            return i
        _, i = _DECODER.raw_decode(text, i)
        i = _skip(text, i)
        if i < len(text) and text[i] == ",":
            i += 1
        idx += 1


def locate(text, path):
    """1-based line of the deepest reachable element of ``path`` in ``text``."""
    pos = _skip(text, 0)
    for key in path:
        try:
            nxt = _child_offset(text, pos, key)
        except (ValueError, IndexError):
            nxt = None
        if nxt is None:
            break
        pos = nxt
    return text.count("\n", 0, pos) + 1


def field_name(path):
    out = ""
    for key in path:
        out += f"[{key}]" if isinstance(key, int) else (f".{key}" if out else str(key))
    return out or "<root>"


# -- parsing ---------------------------------------------------------------------------------

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _diag(source, text, path, message):
    line = locate(text, path) if text is not None else None
    where = f"{source}:{line}" if line else source
    return f"{where}: {field_name(path)}: {message}"


def _axis(values, path, problems):
    lo, hi, n = values[0], values[1], int(values[2])
    log = bool(values[3]) if len(values) > 3 else False
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        problems.append((path, f"axis needs min < max, got [{lo}, {hi}]"))
    elif log and lo <= 0:
        problems.append((path, "a log axis needs a positive minimum"))
    return {"min": lo, "max": hi, "count": n, "log": log}


def _bath(desc, delta, path, problems):
    kind = desc["type"]
    try:
        if kind == "lorentzian":
            if "q_factor" in desc:
                return Lorentzian.from_q(desc["g"], desc["omega_cav"], desc["q_factor"])
            return Lorentzian(desc["g"], desc["omega_cav"], desc["lambda"])
        if kind == "low_frequency":
            return LowFrequency(desc["alpha"], desc["omega_low"], delta)
        return OhmicDrude(desc["alpha"], desc["omega_c"])
    except DomainError as exc:
        problems.append((path, str(exc)))
        return None


def _message(err):
    if err.validator == "oneOf" and {"lambda", "q_factor"} <= set(err.schema.get("properties", {})):
        return "give exactly one of lambda or q_factor"
    return err.message


def resolve(data, source="<config>", text=None):
    """Validate ``data`` and return a :class:`RunConfig` with every default filled in."""
    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise ConfigError([_diag(source, text, list(e.absolute_path), _message(e)) for e in errors])
    cfg = copy.deepcopy(data)
    for k, v in _DEFAULTS.items():
        cfg.setdefault(k, v)
    for k, v in _SECTION_DEFAULTS.items():
        cfg[k] = {**v, **cfg.get(k, {})}
    problems = []
    comps = []
    hold_q = any(d["type"] == "lorentzian" and "q_factor" in d for d in cfg["baths"])
    for i, desc in enumerate(cfg["baths"]):
        comp = _bath(desc, cfg["delta"], ["baths", i], problems)
        comps.append(comp)
        if isinstance(comp, Lorentzian):
            desc["lambda"] = comp.lam
            desc["q_factor"] = comp.q_factor
    if sum(isinstance(c, Lorentzian) for c in comps) > 1:
        problems.append((["baths"], "at most one lorentzian cavity bath is supported"))
    if "sweep" in cfg:
        sw = cfg["sweep"]
        sw["tau"] = _axis(sw["tau"], ["sweep", "tau"], problems)
        sw["x"] = _axis(sw["x"], ["sweep", "x"], problems)
        if sw["tau"]["min"] <= 0:
            problems.append((["sweep", "tau"], "tau values must be positive"))
        if not any(isinstance(c, Lorentzian) for c in comps):
            problems.append((["sweep", "x_param"], "sweeping a cavity parameter needs a lorentzian bath"))
    win = cfg["poles"].get("window")
    if win is not None and not win[0] < win[1]:
        problems.append((["poles", "window"], "window needs lo < hi"))
    if problems:
        raise ConfigError([_diag(source, text, p, m) for p, m in problems])
    return RunConfig(cfg, tuple(comps), hold_q)


def parse_text(text, source="<config>"):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"]) from None
    return resolve(data, source, text)


def load(path):
    """Read and validate a config file; ``OSError`` propagates for I/O failures."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_text(text, str(path))


def axis_values(axis):
    if axis["count"] == 1:
        return np.array([axis["min"]])
    if axis["log"]:
        return np.geomspace(axis["min"], axis["max"], axis["count"])
    return np.linspace(axis["min"], axis["max"], axis["count"])


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration; ``data`` is the JSON-ready dict with defaults filled in."""

    data: dict
    components: tuple
    hold_q: bool = False

    def override(self, *, rwa_mode=None, coupling_scale=None, workers=None):
        """Copy with command-line overrides applied."""
        data = copy.deepcopy(self.data)
        if rwa_mode:
            data["rwa_mode"] = True
        if coupling_scale is not None:
            if not (math.isfinite(coupling_scale) and coupling_scale > 0):
                raise ConfigError([f"--coupling-scale: must be positive, got {coupling_scale}"])
            data["coupling_scale"] = float(coupling_scale)
        if workers is not None:
            if workers < 1:
                raise ConfigError([f"--workers: must be >= 1, got {workers}"])
            data["workers"] = int(workers)
        return replace(self, data=data)

    def __getitem__(self, key):
        return self.data[key]

    @property
    def spectrum(self):
        return CompositeSpectrum(self.components, self.data["coupling_scale"])

    @property
    def quad_spec(self):
        q = self.data["quad"]
        return QuadSpec(q["rel_tol"], q["abs_tol"], q["max_subdivisions"])

    def template(self):
        d = self.data
        return SystemTemplate(self.spectrum, d["delta"], d["rwa_mode"], d["cavity_reference"], d["per_bath_f"],
                              self.hold_q)

    def system(self):
        d = self.data
        return renormalize(self.spectrum, d["delta"], d["rwa_mode"], self.quad_spec,
                           cavity_reference=d["cavity_reference"], per_bath_f=d["per_bath_f"])

    def axes(self):
        if "sweep" not in self.data:
            raise ConfigError(["config: sweep: section required for this command"])
        sw = self.data["sweep"]
        return axis_values(sw["tau"]), sw["x_param"], axis_values(sw["x"])
