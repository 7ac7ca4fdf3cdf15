"""Run a named preset, write its data files and check it against reference values."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dynamics, output, presets
from .config import resolve
from .zeno import AZE, QZE, classify, normalized_rate, sweep


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class Report:
    name: str
    checks: list = field(default_factory=list)
    files: list = field(default_factory=list)
    table: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    def text(self):
        lines = [f"== {self.name} =="]
        lines.extend(self.table)
        lines.extend(c.line() for c in self.checks)
        lines.append(f"{self.name}: {'PASS' if self.passed else 'FAIL'} "
                     f"({sum(c.passed for c in self.checks)}/{len(self.checks)} checks)")
        return "\n".join(lines)


# -- table ------------------------------------------------------------------------------------

def table1_deviation(computed, golden):
    """``(deviation, within tolerance)``: absolute below the small-value cutoff, relative above."""
    if golden < presets.TABLE1_SMALL:
        dev = abs(computed - golden)
        return dev, dev <= presets.TABLE1_ABS_TOL
    dev = abs(computed - golden) / golden
    return dev, dev <= presets.TABLE1_REL_TOL


def table1_values():
    pre = presets.get("table1")
    out = {}
    for label, cfg in pre.panels.items():
        rc = resolve(cfg)
        out[label] = normalized_rate(rc.system(), rc["tau"], rc.quad_spec, per_bath=True)
    return out


def _run_table1(pre, out_dir, workers, report):
    t0 = time.perf_counter()
    rates = table1_values()
    elapsed = time.perf_counter() - t0
    rows = []
    report.table.append(f"{'Q':>7} {'omega_cav':>9} {'golden':>7} {'computed':>9} {'dev':>8}  regime")
    n_ok = n_cls = 0
    for q, gold in presets.TABLE1_GOLDEN.items():
        for w, g in zip(presets.TABLE1_OMEGAS, gold):
            r = rates[f"Q={q:g},omega_cav={w:g}"]
            dev, ok = table1_deviation(r.ratio, g)
            same = classify(g) == r.regime
            n_ok += ok
            n_cls += same
            rows.append((q, w, g, r.ratio, dev, classify(g), r.regime, ok and same))
            report.table.append(f"{q:7g} {w:9g} {g:7.3f} {r.ratio:9.4f} {dev:8.4f}  {r.regime}"
                                f"{'' if ok and same else '  <-- mismatch'}")
    path = Path(out_dir) / "table1.csv"
    output.write_csv(path, ("q_factor", "omega_cav", "golden", "computed", "deviation", "golden_regime",
                            "computed_regime", "ok"), rows)
    output.write_metadata(path, command="reproduce table1", config={k: resolve(v).data for k, v in pre.panels.items()},
                          assumptions=pre.assumptions, extra={"runtime_s": round(elapsed, 1)})
    report.files.append(str(path))
    report.add("table values within tolerance", n_ok == len(rows), f"{n_ok}/{len(rows)} cells")
    report.add("table classification", n_cls == len(rows), f"{n_cls}/{len(rows)} cells")
    report.data.update(rows=rows, runtime_s=elapsed)


# -- phase diagrams ---------------------------------------------------------------------------

def _sweep_panels(pre, out_dir, workers, report):
    diagrams = {}
    for label, cfg in pre.panels.items():
        rc = resolve(cfg)
        taus, x_param, xs = rc.axes()
        pd = sweep(rc.template(), taus, x_param, xs, rc.quad_spec, workers)
        path = Path(out_dir) / f"{pre.name}{label if len(pre.panels) > 1 else ''}.csv"
        output.write_sweep(path, pd)
        output.write_metadata(path, command=f"reproduce {pre.name}", config=rc.data, assumptions=pre.assumptions,
                              extra={"panel": label, "errors": {f"{i},{j}": m for (i, j), m in pd.errors.items()}})
        report.files.append(str(path))
        report.add(f"{label}: no failed cells", not pd.errors, f"{len(pd.errors)} ERROR cells")
        diagrams[label] = pd
    return diagrams


def _regimes(pd):
    return np.array(pd.regimes, dtype=object)


def first_aze_tau(pd):
    rows = np.flatnonzero((_regimes(pd) == AZE).any(axis=1))
    return float(pd.tau_axis[rows[0]]) if rows.size else math.nan


def resonant_column(pd, x0=1.0):
    return int(np.argmin(np.abs(pd.x_axis - x0)))


def _check_fig2(diagrams, report):
    for label, pd in diagrams.items():
        reg = _regimes(pd)
        col = resonant_column(pd)
        report.add(f"{label}: resonant column all QZE", np.all(reg[:, col] == QZE))
        target = presets.FIG2_THRESHOLDS[label]
        t = first_aze_tau(pd)
        ok = math.isfinite(t) and abs(t - target) <= presets.THRESHOLD_TOL * target
        report.add(f"{label}: crossover threshold", ok, f"first AZE at tau={t:.3g}, reference {target:g} +-30%")


def _check_fig3(diagrams, report):
    for label, pd in diagrams.items():
        n = int(np.sum(_regimes(pd) != QZE))
        report.add(f"{label}: every resonant cell QZE", n == 0, f"{n} non-QZE cells, max ratio "
                   f"{np.nanmax(pd.ratios):.4f}")


def _check_transition(diagrams, report, tau=5.0):
    for label, pd in diagrams.items():
        i = int(np.argmin(np.abs(pd.tau_axis - tau)))
        reg = _regimes(pd)[i]
        col = resonant_column(pd)
        n_aze = int(np.sum(reg == AZE))
        ok = reg[col] == QZE and n_aze > 0
        report.add(f"{label}: QZE at resonance turns AZE under detuning (tau={pd.tau_axis[i]:.3g})", ok,
                   f"resonant {reg[col]}, {n_aze} AZE cells in the row")


def fig5_bands(pd):
    """``(tau range of cells with ratio > 1.3, median long-tau AZE ratio)``."""
    tau = np.broadcast_to(pd.tau_axis[:, None], pd.ratios.shape)
    strong = pd.ratios > 1.3
    span = (float(tau[strong].min()), float(tau[strong].max())) if strong.any() else (math.nan, math.nan)
    late = (tau > 10) & (pd.ratios > 1)
    med = float(np.median(pd.ratios[late])) if late.any() else math.nan
    return span, med


def _check_fig5(diagrams, report):
    for label, pd in diagrams.items():
        (lo, hi), med = fig5_bands(pd)
        report.add(f"{label}: pronounced AZE (ratio > 1.3) confined to 1.5 <= tau <= 7.5", lo >= 1.5 and hi <= 7.5,
                   f"found {lo:.3g} <= tau <= {hi:.3g}")
        report.add(f"{label}: long-tau AZE ratios mainly in 1.0-1.1", 1.0 <= med <= 1.11,
                   f"median for tau > 10 is {med:.4f}")


def fig7_bands(pd):
    """``(number of AZE cells below tau=30, max ratio at tau >= 30)``."""
    early = pd.tau_axis < 30
    n = int(np.sum(_regimes(pd)[early] == AZE))
    late = pd.ratios[~early]
    return n, float(np.nanmax(late)) if late.size else math.nan


def _check_fig7(diagrams, report):
    for label, pd in diagrams.items():
        n, mx = fig7_bands(pd)
        report.add(f"{label}: no AZE cell for tau < 30", n == 0, f"{n} cells")
        report.add(f"{label}: ratios for tau >= 30 within 1.0-1.02", mx <= 1.02, f"max {mx:.4f}")


_FIG_CHECKS = {"fig2": _check_fig2, "fig3": _check_fig3, "fig4": _check_transition, "fig5": _check_fig5,
               "fig6": _check_transition, "fig7": _check_fig7}


# -- dynamics ---------------------------------------------------------------------------------

def dynamics_traces(pre):
    out = {}
    for label, cfg in pre.panels.items():
        rc = resolve(cfg)
        dyn = rc["dynamics"]
        sys = rc.system()
        times = np.linspace(0.0, dyn["t_max"], dyn["n_times"])
        out[label] = (dynamics.unmeasured_trace(sys, times, rc.quad_spec),
                      dynamics.measured_probability(sys, dyn["tau"], times, rc.quad_spec))
    return out


def _run_dynamics(pre, out_dir, workers, report):
    traces = dynamics_traces(pre)
    labels = list(traces)
    times = traces[labels[0]][0].times
    cols = [times]
    header = ["t"]
    for label in labels:
        un, me = traces[label]
        cols.extend([un.probabilities, me.probabilities])
        header.extend([f"{label}_unmeasured", f"{label}_measured"])
    path = Path(out_dir) / "fig_dynamics.csv"
    output.write_csv(path, header, zip(*cols))
    output.write_metadata(path, command="reproduce fig_dynamics",
                          config={k: resolve(v).data for k, v in pre.panels.items()}, assumptions=pre.assumptions)
    report.files.append(str(path))
    g = pre.params["g"]
    for label, want in (("resonant", QZE), ("detuned", AZE)):
        un, me = traces[label]
        pu, pm = float(un.probabilities[-1]), float(me.probabilities[-1])
        ok = pm > pu if want == QZE else pm < pu
        relation = ">" if want == QZE else "<"
        report.table.append(f"{label:>9}: t = {times[-1] * g:.4f}/g  measured {pm:.5f}  unmeasured {pu:.5f}")
        report.add(f"{label}: measured {relation} unmeasured at t = pi/g ({want})", ok)


# -- splitting --------------------------------------------------------------------------------

def _dressed_pair(poles):
    """Lowest-lying and highest-lying unflagged roots with the largest weight on each side."""
    good = [p for p in poles if not p.flagged]
    low = [p for p in good if p.omega < 0]
    high = [p for p in good if p.omega > 0]
    if not low or not high:
        return None
    return max(low, key=lambda p: p.residue), max(high, key=lambda p: p.residue)


def splitting_analysis(pre=None):
    """Pole offsets of every panel under several conventions, in units of ``g``."""
    pre = pre or presets.get("splitting")
    g = pre.params["g"]
    out = {}
    for label, cfg in pre.panels.items():
        rc = resolve(cfg)
        sys = rc.system()
        poles = dynamics.find_poles(sys, spec=rc.quad_spec)
        pair = _dressed_pair(poles)
        res = dynamics.find_resonances(sys, [p.omega - 1j * max(p.decay, 1e-9) for p in pair], rc.quad_spec)
        res = sorted(res, key=lambda r: r.omega)
        shift = (sys.eta_delta - sys.delta) / g
        scale = rc["coupling_scale"]
        doubled = resolve({**cfg, "coupling_scale": 1.0})
        pair1 = _dressed_pair(dynamics.find_poles(doubled.system(), spec=rc.quad_spec))
        out[label] = {
            "eta": sys.eta,
            "coupling": scale * g,
            "lambda": sys.effective_spectrum.components[0].lam,
            "conventions": {
                "real roots, offset from delta": [p.offset_from_delta / g for p in pair],
                "real roots, offset from dressed spacing": [p.omega / g for p in pair],
                "complex resonances, offset from delta": [r.omega / g + shift for r in res],
                "complex resonances, offset from dressed spacing": [r.omega / g for r in res],
                "real roots, coupling_scale 1, offset from delta": [p.offset_from_delta / g for p in pair1],
            },
            "residues": [p.residue for p in pair],
            "resonance_widths": [r.width / g for r in res],
        }
    return out


REPORTED_CONVENTION = "real roots, offset from delta"


def _rel_dev(values, golden):
    return max(abs(v - t) / abs(t) for v, t in zip(values, golden))


def _run_splitting(pre, out_dir, workers, report):
    data = splitting_analysis(pre)
    g = pre.params["g"]
    cav = data["cavity"]
    analytic = math.sqrt(cav["coupling"] ** 2 - cav["lambda"] ** 2 / 4) / g
    res = cav["conventions"]["complex resonances, offset from dressed spacing"]
    dev = max(abs(abs(v) - analytic) / analytic for v in res)
    report.add("cavity-only resonances at +-sqrt(V**2 - lambda**2/4)", dev <= presets.SPLITTING_ANALYTIC_TOL,
               f"{res[0]:+.6f} / {res[1]:+.6f} vs +-{analytic:.6f}, max rel dev {dev:.2e}")
    rows = []
    report.table.append(f"{'bath':>14} {'convention':<48} {'lower':>8} {'upper':>8} {'max dev':>8}")
    for bath, gold in presets.SPLITTING_GOLDEN.items():
        convs = data[bath]["conventions"]
        for name, vals in convs.items():
            d = _rel_dev(vals, gold)
            rows.append((bath, name, vals[0], vals[1], gold[0], gold[1], d))
            report.table.append(f"{bath:>14} {name:<48} {vals[0]:+8.4f} {vals[1]:+8.4f} {d:8.4f}")
        report.table.append(f"{bath:>14} {'reference':<48} {gold[0]:+8.4f} {gold[1]:+8.4f}")
        vals = convs[REPORTED_CONVENTION]
        d = _rel_dev(vals, gold)
        report.add(f"{bath}: offsets within 5%", d <= presets.SPLITTING_TOL,
                   f"{vals[0]:+.4f}g / {vals[1]:+.4f}g vs {gold[0]:+.4f}g / {gold[1]:+.4f}g, max rel dev {d:.3f}")
        same_sign = np.sign(abs(vals[1]) - abs(vals[0])) == np.sign(abs(gold[1]) - abs(gold[0]))
        report.add(f"{bath}: asymmetry sign", same_sign)
    best = {}
    for bath, gold in presets.SPLITTING_GOLDEN.items():
        convs = data[bath]["conventions"]
        best[bath] = min(convs, key=lambda k: _rel_dev(convs[k], gold))
    residual = {
        bath: {
            "reported_convention": REPORTED_CONVENTION,
            "max_relative_deviation": _rel_dev(data[bath]["conventions"][REPORTED_CONVENTION], gold),
            "best_convention": best[bath],
            "best_relative_deviation": _rel_dev(data[bath]["conventions"][best[bath]], gold),
        }
        for bath, gold in presets.SPLITTING_GOLDEN.items()
    }
    note = ("Offsets depend on the reference (bare delta vs dressed spacing) at the level of the dressed "
            "shift (eta - 1) delta / g, and on the real-root vs complex-resonance reading. The coupling_scale 1 "
            "row shows the factor-of-two sensitivity of the overall splitting. No single convention brings both "
            "intrinsic baths within tolerance: best per bath is " +
            "; ".join(f"{b}: {v['best_convention']} ({v['best_relative_deviation']:.3f})" for b, v in residual.items()))
    report.table.append(note)
    path = Path(out_dir) / "splitting.csv"
    output.write_csv(path, ("bath", "convention", "lower_over_g", "upper_over_g", "reference_lower",
                            "reference_upper", "max_rel_dev"), rows)
    output.write_metadata(path, command="reproduce splitting",
                          config={k: resolve(v).data for k, v in pre.panels.items()}, assumptions=pre.assumptions,
                          extra={"analysis": data, "residual": residual, "convention_note": note,
                                 "cavity_analytic_over_g": analytic})
    report.files.append(str(path))
    report.data.update(analysis=data, residual=residual, note=note)


def run(name, out_dir, workers=1):
    """Run preset ``name`` into ``out_dir`` and return its :class:`Report`."""
    pre = presets.get(name)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    report = Report(name)
    if name == "table1":
        _run_table1(pre, out_dir, workers, report)
    elif name == "fig_dynamics":
        _run_dynamics(pre, out_dir, workers, report)
    elif name == "splitting":
        _run_splitting(pre, out_dir, workers, report)
    else:
        diagrams = _sweep_panels(pre, out_dir, workers, report)
        _FIG_CHECKS[name](diagrams, report)
        report.data["diagrams"] = diagrams
    summary = Path(out_dir) / f"{name}.report.txt"
    output.write_text(summary, report.text() + "\n")
    report.files.append(str(summary))
    return report

