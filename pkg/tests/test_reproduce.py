import json

import numpy as np
import pytest

from qzeno import presets, reproduce
from qzeno.output import SWEEP_HEADER
from qzeno.zeno import AZE, QZE


@pytest.fixture(scope="module")
def out_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("reproduce")


@pytest.fixture(scope="module")
def run_preset(out_dir):
    cache = {}

    def go(name):
        if name not in cache:
            cache[name] = reproduce.run(name, out_dir / name)
        return cache[name]
    return go


def test_table1_deviation_rules():
    assert reproduce.table1_deviation(0.13, 0.122)[1]
    assert not reproduce.table1_deviation(0.15, 0.122)[1]
    assert reproduce.table1_deviation(1.9, 1.994)[1]
    assert not reproduce.table1_deviation(1.6, 1.994)[1]


def test_every_preset_records_assumptions():
    for name in presets.PRESETS:
        pre = presets.get(name)
        assert pre.panels and pre.description
        assert isinstance(pre.assumptions, tuple)
    with pytest.raises(KeyError):
        presets.get("fig99")


@pytest.mark.parametrize("name", ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"])
def test_figure_presets(name, out_dir, run_preset):
    report = run_preset(name)
    assert report.passed, report.text()
    diagrams = report.data["diagrams"]
    for label, pd in diagrams.items():
        stem = f"{name}{label if len(diagrams) > 1 else ''}"
        path = out_dir / name / f"{stem}.csv"
        assert path.read_text().splitlines()[0] == ",".join(SWEEP_HEADER)
        meta = json.loads(path.with_name(f"{stem}.meta.json").read_text())
        assert meta["config"]["sweep"] and "assumptions" in meta
        assert not pd.errors


def test_fig5_bands_values(run_preset):
    report = run_preset("fig5")
    for pd in report.data["diagrams"].values():
        (lo, hi), median = reproduce.fig5_bands(pd)
        assert 1.5 <= lo and hi <= 7.5
        assert 1.0 <= median <= 1.11


def test_fig7_bands_values(run_preset):
    for pd in run_preset("fig7").data["diagrams"].values():
        n_early, max_late = reproduce.fig7_bands(pd)
        assert n_early == 0 and 1.0 <= max_late <= 1.02


def test_fig3_resonant_lambda_sweep_is_all_zeno(run_preset):
    report = run_preset("fig3")
    for pd in report.data["diagrams"].values():
        assert np.all(np.asarray(pd.regimes) == QZE)


def test_fig_dynamics_report(out_dir):
    report = reproduce.run("fig_dynamics", out_dir / "dyn")
    assert report.passed, report.text()
    header = (out_dir / "dyn" / "fig_dynamics.csv").read_text().splitlines()[0]
    assert header == "t,resonant_unmeasured,resonant_measured,detuned_unmeasured,detuned_measured"


def test_splitting_report_documents_residual(out_dir):
    report = reproduce.run("splitting", out_dir / "split")
    names = {c.name: c.passed for c in report.checks}
    assert names["cavity-only resonances at +-sqrt(V**2 - lambda**2/4)"]
    assert names["low_frequency: offsets within 5%"]
    assert names["ohmic: asymmetry sign"]
    meta = json.loads((out_dir / "split" / "splitting.meta.json").read_text())
    assert set(meta["residual"]) == {"low_frequency", "ohmic"}
    assert "convention" in meta["convention_note"]
    rows = (out_dir / "split" / "splitting.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 5


def test_transition_helpers():
    class Fake:
        tau_axis = np.array([1.0, 2.0, 3.0])
        x_axis = np.array([0.99, 1.0, 1.01])
        regimes = [[QZE] * 3, [QZE, QZE, AZE], [AZE, QZE, AZE]]
        ratios = np.array([[0.5] * 3, [0.5, 0.5, 1.2], [1.4, 0.5, 1.2]])
    assert reproduce.first_aze_tau(Fake()) == 2.0
    assert reproduce.resonant_column(Fake()) == 1
