"""Time the numba kernels against the numpy fallback on representative workloads.

    python benchmarks/bench_kernels.py [--repeat N] [--json out.json]

Each workload is run once per backend to warm up (numba compiles or loads its
cache), then timed ``--repeat`` times; the best time is reported. Results are
also compared so a speedup never hides a disagreement.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from qzeno import _backend, _jit, oracle
from qzeno.quad import QuadSpec
from qzeno.renorm import renormalize
from qzeno.spectra import CompositeSpectrum, Lorentzian, LowFrequency, OhmicDrude
from qzeno.zeno import normalized_rate

SPEC = QuadSpec()


def _systems():
    cav = Lorentzian.from_q(1e-2, 1.01, 1e4)
    return {"cavity+low": renormalize(CompositeSpectrum((cav, LowFrequency(1e-4, 0.1)))),
            "cavity+ohmic": renormalize(CompositeSpectrum((cav, OhmicDrude(1e-4, 10.0))))}


def workloads():
    systems = _systems()
    low = systems["cavity+low"]
    p = low.packed
    taus = np.geomspace(0.05, 40, 40)
    shifts = low.eta_delta + np.linspace(-0.05, 0.05, 101)
    grid = np.linspace(0.0, 40.0, 200_000)
    bath = oracle.discretize(low, 40.0, 2000)
    keep = bath.V_k != 0
    return {
        "density on 2e5 points": lambda: _backend.rho_values(p, p.mask(), grid),
        "renormalization (both systems)": lambda: [renormalize(s.spectrum) for s in systems.values()],
        "40 rate ratios (cavity+low)": lambda: np.array([normalized_rate(low, t).ratio for t in taus]),
        "40 rate ratios (cavity+ohmic)": lambda: np.array([normalized_rate(systems["cavity+ohmic"], t).ratio
                                                           for t in taus]),
        "101 level shifts": lambda: _backend.level_shift(p, p.mask(), shifts, SPEC),
        "arrowhead spectrum K=2000": lambda: _backend.arrowhead_decompose(bath.detunings[keep],
                                                                          bath.V_k[keep] ** 2).energies,
    }


def _value(out):
    if isinstance(out, list):
        return np.array([s.eta for s in out])
    return np.asarray(out, dtype=float)


def run(repeat):
    rows = []
    for name in workloads():
        res = {}
        for backend in ("numpy", "numba"):
            with _jit.use_backend(backend):
                fn = workloads()[name]
                ref = _value(fn())
                best = float("inf")
                for _ in range(repeat):
                    t0 = time.perf_counter()
                    fn()
                    best = min(best, time.perf_counter() - t0)
                res[backend] = (best, ref)
        diff = float(np.max(np.abs(res["numba"][1] - res["numpy"][1]) / (np.abs(res["numpy"][1]) + 1e-300)))
        rows.append({"workload": name, "numpy_s": res["numpy"][0], "numba_s": res["numba"][0],
                     "speedup": res["numpy"][0] / res["numba"][0], "max_rel_diff": diff})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write the rows as JSON")
    args = ap.parse_args(argv)
    if not _jit.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")
    rows = run(args.repeat)
    print(f"{'workload':<34} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8} {'max rel diff':>13}")
    for r in rows:
        print(f"{r['workload']:<34} {r['numpy_s']:10.4f} {r['numba_s']:10.4f} {r['speedup']:8.1f} "
              f"{r['max_rel_diff']:13.2e}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
