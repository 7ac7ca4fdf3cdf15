import json
from pathlib import Path

import numpy as np
import pytest

from qzeno.config import SCHEMA, ConfigError, axis_values, field_name, load, locate, parse_text, resolve

DOCS = Path(__file__).resolve().parents[1] / "docs"

BASE = {"baths": [{"type": "lorentzian", "g": 0.01, "omega_cav": 1.0, "q_factor": 1e4}]}


def errors_of(text):
    with pytest.raises(ConfigError) as info:
        parse_text(text, "run.json")
    return info.value.diagnostics


def test_defaults_filled():
    rc = resolve(BASE)
    assert rc["delta"] == 1.0 and rc["coupling_scale"] == 1.0 and rc["rwa_mode"] is False
    assert rc["oracle"]["K"] == 4000
    assert rc["quad"]["rel_tol"] == 1e-9


def test_q_factor_resolved_to_width():
    rc = resolve(BASE)
    bath = rc["baths"][0]
    assert bath["lambda"] == pytest.approx(1e-4)
    assert rc.components[0].lam == pytest.approx(1e-4)
    assert rc.hold_q


def test_lambda_given_directly():
    rc = resolve({"baths": [{"type": "lorentzian", "g": 0.01, "omega_cav": 2.0, "lambda": 1e-3}]})
    assert rc["baths"][0]["q_factor"] == pytest.approx(2000.0)
    assert not rc.hold_q


def test_both_width_fields_rejected():
    text = json.dumps({"baths": [{"type": "lorentzian", "g": 0.01, "omega_cav": 1.0,
                                  "lambda": 1e-4, "q_factor": 1e4}]}, indent=2)
    (msg,) = errors_of(text)
    assert "exactly one of lambda or q_factor" in msg
    assert msg.startswith("run.json:3: baths[0]:")


def test_line_numbers_point_at_field():
    text = '{\n  "baths": [\n    {"type": "ohmic", "alpha": 1e-4, "omega_c": 10}\n  ],\n  "tau": -1\n}\n'
    (msg,) = errors_of(text)
    assert msg.startswith("run.json:5: tau:")


def test_invalid_json_reports_position():
    (msg,) = errors_of('{"baths": [}')
    assert msg.startswith("run.json:1:") and "invalid JSON" in msg


@pytest.mark.parametrize("data,needle", [
    ({"baths": []}, "baths"),
    ({}, "baths"),
    ({"baths": [{"type": "phonon"}]}, "baths[0].type"),
    ({"baths": [{"type": "ohmic", "alpha": 1e-4}]}, "omega_c"),
    ({**BASE, "unknown": 1}, "unknown"),
    ({**BASE, "sweep": {"tau": [2.0, 1.0, 5], "x_param": "omega_cav", "x": [0.9, 1.1, 3]}}, "sweep.tau"),
    ({**BASE, "sweep": {"tau": [0.0, 1.0, 5, True], "x_param": "omega_cav", "x": [0.9, 1.1, 3]}}, "positive"),
    ({**BASE, "sweep": {"tau": [0.1, 1.0, 0], "x_param": "omega_cav", "x": [0.9, 1.1, 3]}}, "sweep.tau"),
    ({**BASE, "sweep": {"tau": [0.1, 1.0, 5], "x_param": "g", "x": [0.9, 1.1, 3]}}, "x_param"),
    ({"baths": [{"type": "ohmic", "alpha": 1e-4, "omega_c": 10}],
      "sweep": {"tau": [0.1, 1.0, 5], "x_param": "omega_cav", "x": [0.9, 1.1, 3]}}, "lorentzian"),
    ({"baths": BASE["baths"] * 2}, "at most one"),
    ({"baths": [{"type": "lorentzian", "g": 0.01, "omega_cav": 1.0, "lambda": 5.0}]}, "baths[0]"),
    ({**BASE, "poles": {"window": [0.1, -0.1]}}, "poles.window"),
])
def test_validation_failures(data, needle):
    with pytest.raises(ConfigError) as info:
        resolve(data)
    assert any(needle in d for d in info.value.diagnostics), info.value.diagnostics


def test_all_problems_reported_together():
    with pytest.raises(ConfigError) as info:
        resolve({"baths": [{"type": "ohmic", "alpha": -1, "omega_c": 0}], "tau": 0})
    assert len(info.value.diagnostics) >= 3


def test_axes_and_values():
    rc = resolve({**BASE, "sweep": {"tau": [0.01, 1.0, 3, True], "x_param": "lambda", "x": [1e-4, 3e-4, 3]}})
    taus, name, xs = rc.axes()
    np.testing.assert_allclose(taus, [0.01, 0.1, 1.0])
    assert name == "lambda"
    np.testing.assert_allclose(xs, [1e-4, 2e-4, 3e-4])
    assert axis_values({"min": 2.0, "max": 3.0, "count": 1, "log": False}).tolist() == [2.0]


def test_axes_require_sweep_section():
    with pytest.raises(ConfigError):
        resolve(BASE).axes()


def test_override_flags():
    rc = resolve(BASE).override(rwa_mode=True, coupling_scale=0.5, workers=3)
    assert rc["rwa_mode"] and rc["coupling_scale"] == 0.5 and rc["workers"] == 3
    assert rc.spectrum.coupling_scale == 0.5
    with pytest.raises(ConfigError):
        resolve(BASE).override(coupling_scale=-1.0)
    with pytest.raises(ConfigError):
        resolve(BASE).override(workers=0)


def test_locate_and_field_name():
    text = '{\n "a": [\n  1,\n  {"b": 2}\n ]\n}'
    assert locate(text, ["a", 1, "b"]) == 4
    assert locate(text, ["missing"]) == 1
    assert field_name(["baths", 0, "g"]) == "baths[0].g"
    assert field_name([]) == "<root>"


def test_load_propagates_io_errors(tmp_path):
    with pytest.raises(OSError):
        load(tmp_path / "absent.json")


def test_shipped_schema_in_sync():
    assert json.loads((DOCS / "config.schema.json").read_text()) == json.loads(json.dumps(SCHEMA))


@pytest.mark.parametrize("path", sorted((DOCS / "examples").glob("*.json")), ids=lambda p: p.name)
def test_shipped_examples_validate(path):
    load(path)
