"""Command-line entry point.

Exit codes: 0 ok, 1 reference mismatch, 2 configuration error,
3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings

import numpy as np

from . import __version__, dynamics, oracle, output, presets, reproduce
from .config import ConfigError, load
from .errors import ConvergenceError, DegenerateBaselineError, DomainError
from .zeno import classify, normalized_rate, sweep

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4


class GuardViolation(RuntimeError):
    pass


def _emit(payload, out, command, cfg):
    text = output.json_text(payload)
    if out:
        output.write_text(out, text)
        output.write_metadata(out, command=command, config=cfg.data)
    sys.stdout.write(text)


def _load(args):
    cfg = load(args.config)
    return cfg.override(rwa_mode=getattr(args, "rwa", False), coupling_scale=getattr(args, "coupling_scale", None),
                        workers=getattr(args, "workers", None))


def cmd_rate(args):
    cfg = _load(args)
    tau = args.tau if args.tau is not None else cfg["tau"]
    sys_ = cfg.system()
    rates = normalized_rate(sys_, tau, cfg.quad_spec)
    payload = {"eta": sys_.eta, "eta_per_bath": list(sys_.eta_per_bath), "eta_delta": sys_.eta_delta,
               **rates.as_dict(), "decomposition": rates.decomposition()}
    _emit(payload, args.out, "rate", cfg)
    return EXIT_OK


def cmd_sweep(args):
    cfg = _load(args)
    taus, x_param, xs = cfg.axes()
    pd = sweep(cfg.template(), taus, x_param, xs, cfg.quad_spec, cfg["workers"])
    out = args.out or "sweep.csv"
    output.write_sweep(out, pd)
    output.write_metadata(out, command="sweep", config=cfg.data,
                          extra={"errors": {f"{i},{j}": m for (i, j), m in sorted(pd.errors.items())}})
    if pd.errors:
        print(f"warning: {len(pd.errors)} cells failed and are marked ERROR", file=sys.stderr)
    print(f"wrote {pd.ratios.size} cells to {out}")
    return EXIT_OK


def cmd_dynamics(args):
    cfg = _load(args)
    dyn = cfg["dynamics"]
    tau = dyn.get("tau", cfg["tau"])
    t_max = dyn.get("t_max", dyn["n_measurements"] * tau)
    times = np.linspace(0.0, t_max, dyn["n_times"])
    sys_ = cfg.system()
    free = dynamics.unmeasured_trace(sys_, times, cfg.quad_spec)
    kicked = dynamics.measured_probability(sys_, tau, times, cfg.quad_spec)
    out = args.out or "dynamics.csv"
    output.write_csv(out, ("t", "unmeasured", "measured"), zip(times, free.probabilities, kicked.probabilities))
    output.write_metadata(out, command="dynamics", config=cfg.data,
                          extra={"tau": tau, "fitted_rate": kicked.fitted_rate})
    print(f"wrote {times.size} time points to {out}; measured rate {kicked.fitted_rate:.6g}")
    return EXIT_OK


def cmd_poles(args):
    cfg = _load(args)
    sys_ = cfg.system()
    p = cfg["poles"]
    poles = dynamics.find_poles(sys_, p.get("window"), cfg.quad_spec, p["n_brackets"])
    guesses = [pl.omega - 1j * max(pl.decay, 1e-9 * sys_.delta) for pl in poles if not pl.flagged]
    res = dynamics.find_resonances(sys_, guesses, cfg.quad_spec)
    payload = {
        "eta_delta": sys_.eta_delta,
        "poles": [{"omega": pl.omega, "lab_frequency": pl.lab_frequency, "offset_from_delta": pl.offset_from_delta,
                   "width": pl.width, "residue": pl.residue, "flagged": pl.flagged} for pl in poles],
        "resonances": [{"omega": r.omega, "width": r.width, "offset_from_delta": r.offset_from_delta,
                        "residue": [r.residue.real, r.residue.imag]} for r in res],
    }
    _emit(payload, args.out, "poles", cfg)
    return EXIT_OK


def cmd_oracle(args):
    cfg = _load(args)
    o = cfg["oracle"]
    tau = cfg["tau"]
    sys_ = cfg.system()
    bath = oracle.discretize(sys_, o["omega_max"], o["K"], o["scheme"])
    survival, est = oracle.measured_evolution(bath, tau, o["n"])
    rates = normalized_rate(sys_, tau, cfg.quad_spec, per_bath=False)
    guard = oracle.recurrence_guard(bath, tau, o["n"])
    dev = abs(est - rates.gamma_tau) / rates.gamma_tau if rates.gamma_tau > 0 else math.nan
    payload = {"tau": tau, "K": bath.K, "n": o["n"], "gamma_oracle": est, "gamma_tau": rates.gamma_tau,
               "relative_deviation": dev, "ratio_oracle": est / rates.gamma_0, "ratio": rates.ratio,
               "regime_oracle": classify(est / rates.gamma_0), "regime": rates.regime,
               "final_survival": float(survival[-1]), "recurrence_time": bath.recurrence_time,
               "protocol_time": o["n"] * tau, "guard_ok": guard}
    _emit(payload, args.out, "oracle", cfg)
    if not guard:
        raise GuardViolation(f"protocol time {o['n'] * tau:g} exceeds the discretization recurrence time "
                             f"{bath.recurrence_time:g}; refine K or shorten the protocol")
    return EXIT_OK


def cmd_reproduce(args):
    out = args.out or f"reproduce-{args.name}"
    report = reproduce.run(args.name, out, args.workers or 1)
    print(report.text())
    return EXIT_OK if report.passed else EXIT_MISMATCH


def _common(p, *, config=True, physics=True):
    if config:
        p.add_argument("--config", required=True, help="JSON run configuration (schema in docs/config.schema.json)")
    p.add_argument("--out", help="output path")
    p.add_argument("--workers", type=int, help="worker processes for sweeps")
    if physics:
        p.add_argument("--rwa", action="store_true", help="drop the counter-rotating terms")
        p.add_argument("--coupling-scale", type=float, dest="coupling_scale",
                       help="multiplier on the cavity coupling amplitude")


def build_parser():
    parser = argparse.ArgumentParser(prog="qzeno", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("rate", help="rates and ratio at one measurement interval (JSON to stdout)")
    _common(p)
    p.add_argument("--tau", type=float, help="override the configured tau")
    p.set_defaults(func=cmd_rate)
    p = sub.add_parser("sweep", help="ratio grid over tau and a cavity parameter (CSV)")
    _common(p)
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("dynamics", help="population with and without periodic measurement (CSV)")
    _common(p)
    p.set_defaults(func=cmd_dynamics)
    p = sub.add_parser("poles", help="dressed-state poles and resonances (JSON to stdout)")
    _common(p)
    p.set_defaults(func=cmd_poles)
    p = sub.add_parser("oracle", help="finite-bath exact evolution versus the continuum rate")
    _common(p)
    p.set_defaults(func=cmd_oracle)
    p = sub.add_parser("reproduce", help="run a named reference preset and check it")
    p.add_argument("name", choices=list(presets.PRESETS))
    _common(p, config=False, physics=False)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GuardViolation as exc:
        print(f"warning: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConvergenceError, DegenerateBaselineError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
