"""Measurement-modulated decay rates and QZE/AZE phase diagrams.

Periodic ideal projections at interval ``tau`` turn the golden-rule rate
``gamma_0 = 2 pi J(eta delta)`` into the overlap of the effective density with
the sinc² kernel ``F(x, tau) = 2 sin²(x tau/2) / (pi x² tau)`` centred at the
dressed spacing. The ratio ``gamma(tau)/gamma_0`` below 1 is Zeno-like,
above the neutral band anti-Zeno-like.
"""

from __future__ import annotations

import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import ConvergenceError, DegenerateBaselineError, DomainError
from .quad import QuadSpec
from .renorm import renormalize
from .spectra import CompositeSpectrum, Lorentzian

QZE, NEUTRAL, AZE, ERROR = "QZE", "NEUTRAL", "AZE", "ERROR"
NEUTRAL_BAND = (1.0, 1.05)
X_PARAMS = ("omega_cav", "lambda")


def kernel_F(x, tau):
    """Unit-normalized sinc² measurement kernel; ``tau/(2 pi)`` at ``x = 0``."""
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    out = _backend.sinc2_numpy(x, tau)
    return float(out) if out.ndim == 0 else out


def classify(ratio):
    if ratio is None or not math.isfinite(ratio):
        return ERROR
    if ratio < NEUTRAL_BAND[0]:
        return QZE
    if ratio <= NEUTRAL_BAND[1]:
        return NEUTRAL
    return AZE


def _check_tau(tau):
    if not (math.isfinite(tau) and tau > 0):
        raise DomainError(f"tau must be positive and finite, got {tau!r}")


def _partial_rate(sys, tau, spec, mask):
    p = sys.packed
    value, _ = _backend.rate_integral(p, mask, sys.eta_delta, tau, spec)
    return 2 * math.pi * max(value, 0.0)


def gamma_tau(sys, tau, spec=QuadSpec()):
    """``2 pi * integral_0^inf J f F(w - eta delta, tau) dw``."""
    _check_tau(tau)
    return _partial_rate(sys, tau, spec, sys.packed.mask())


def gamma_0(sys):
    """Golden-rule rate ``2 pi J(eta delta)``; the counter-rotating factor is 1 there."""
    p = sys.packed
    j = float(_backend.rho_values(p, p.mask(), np.array([sys.eta_delta]))[0])
    if not j > 0:
        raise DegenerateBaselineError("density vanishes at the dressed spacing; ratio undefined")
    return 2 * math.pi * j


def small_tau_slope(sys, spec=QuadSpec()):
    """``integral_0^inf J f dw``, the slope of ``gamma(tau)`` at ``tau -> 0``."""
    p = sys.packed
    value, _ = _backend.rho_integral(p, p.mask(), spec)
    return value


@dataclass(frozen=True)
class DecayRates:
    gamma_tau: float
    gamma_0: float
    ratio: float
    per_bath: tuple
    tau: float

    @property
    def regime(self):
        return classify(self.ratio)

    def decomposition(self):
        """``sum_i w_i r_i``, equal to ``ratio`` up to quadrature error."""
        return math.fsum(w * r for w, r in self.per_bath if w > 0)

    def as_dict(self):
        return {
            "tau": self.tau,
            "gamma_tau": self.gamma_tau,
            "gamma_0": self.gamma_0,
            "ratio": self.ratio,
            "regime": self.regime,
            "per_bath": [{"weight": w, "partial_ratio": r} for w, r in self.per_bath],
        }


def normalized_rate(sys, tau, spec=QuadSpec(), per_bath=True):
    """Rates, ratio and (optionally) the per-bath weights and partial ratios."""
    _check_tau(tau)
    g0 = gamma_0(sys)
    gt = gamma_tau(sys, tau, spec)
    parts = []
    if per_bath:
        p = sys.packed
        total_j = g0 / (2 * math.pi)
        for i in range(p.kinds.size):
            m = p.mask(i)
            ji = float(_backend.rho_values(p, m, np.array([sys.eta_delta]))[0])
            if ji > 0:
                parts.append((ji / total_j, _partial_rate(sys, tau, spec, m) / (2 * math.pi * ji)))
            else:
                parts.append((0.0, math.nan))
    return DecayRates(gt, g0, gt / g0, tuple(parts), float(tau))


@dataclass(frozen=True)
class SystemTemplate:
    """Recipe for the renormalized system at each value of a swept cavity parameter.

    ``hold_q`` keeps the quality factor fixed when the cavity frequency is
    swept (the width follows ``omega_cav / Q``).
    """

    spectrum: CompositeSpectrum
    delta: float = 1.0
    rwa_mode: bool = False
    cavity_reference: str = "renormalized"
    per_bath_f: bool = False
    hold_q: bool = False

    def spectrum_at(self, x_param=None, x=None):
        if x_param is None:
            return self.spectrum
        if x_param not in X_PARAMS:
            raise DomainError(f"x_param must be one of {X_PARAMS}, got {x_param!r}")
        idx = self.spectrum.cavity_index()
        if idx is None:
            raise DomainError("sweeping a cavity parameter needs a Lorentzian component")
        cav = self.spectrum.components[idx]
        if x_param == "omega_cav":
            lam = x / cav.q_factor if self.hold_q else cav.lam
            new = Lorentzian(cav.g, x, lam)
        else:
            new = Lorentzian(cav.g, cav.omega_cav, x)
        return self.spectrum.replace(idx, new)

    def build(self, x_param=None, x=None, spec=QuadSpec()):
        return renormalize(self.spectrum_at(x_param, x), self.delta, self.rwa_mode, spec,
                           cavity_reference=self.cavity_reference, per_bath_f=self.per_bath_f)


@dataclass
class PhaseDiagram:
    tau_axis: np.ndarray
    x_axis: np.ndarray
    x_param: str
    gamma_tau: np.ndarray
    gamma_0: np.ndarray
    ratios: np.ndarray
    regimes: list
    errors: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.ratios.shape

    def rows(self):
        """``(tau, x, gamma_tau, gamma_0, ratio, regime)`` in tau-outer order."""
        for i, t in enumerate(self.tau_axis):
            for j, x in enumerate(self.x_axis):
                yield (float(t), float(x), float(self.gamma_tau[i, j]), float(self.gamma_0[i, j]),
                       float(self.ratios[i, j]), self.regimes[i][j])


_NUMERIC_ERRORS = (ConvergenceError, DegenerateBaselineError, DomainError, ArithmeticError, ValueError)


def _column(args):
    """All tau cells for one swept value; the system is renormalized once."""
    template, x_param, x, taus, spec = args
    n = len(taus)
    gt = np.full(n, np.nan)
    g0 = np.full(n, np.nan)
    errs = {}
    try:
        sys = template.build(x_param, x, spec)
        base = gamma_0(sys)
    except _NUMERIC_ERRORS as exc:
        return gt, g0, {i: f"{type(exc).__name__}: {exc}" for i in range(n)}
    for i, t in enumerate(taus):
        try:
            gt[i] = gamma_tau(sys, t, spec)
            g0[i] = base
        except _NUMERIC_ERRORS as exc:
            errs[i] = f"{type(exc).__name__}: {exc}"
    return gt, g0, errs


def _strictly_increasing(name, axis):
    a = np.asarray(axis, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise DomainError(f"{name} must be a nonempty 1-D axis")
    if np.any(np.diff(a) <= 0) or not np.all(np.isfinite(a)):
        raise DomainError(f"{name} must be finite and strictly increasing")
    return a


def _pool_context():
    methods = multiprocessing.get_all_start_methods()
    return multiprocessing.get_context("fork" if "fork" in methods else methods[0])


def sweep(template, tau_axis, x_param, x_axis, spec=QuadSpec(), workers=1):
    """Ratio grid over ``tau_axis`` x ``x_axis``; identical for any worker count.

    Each swept value re-solves the renormalization; cell failures are kept
    in the grid as ``ERROR`` instead of aborting.
    """
    taus = _strictly_increasing("tau_axis", tau_axis)
    xs = _strictly_increasing("x_axis", x_axis)
    if np.any(taus <= 0):
        raise DomainError("tau values must be positive")
    if x_param not in X_PARAMS:
        raise DomainError(f"x_param must be one of {X_PARAMS}, got {x_param!r}")
    tasks = [(template, x_param, float(x), taus, spec) for x in xs]
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks)), mp_context=_pool_context()) as ex:
            cols = list(ex.map(_column, tasks))
    else:
        cols = [_column(t) for t in tasks]
    gt = np.column_stack([c[0] for c in cols])
    g0 = np.column_stack([c[1] for c in cols])
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = gt / g0
    errors = {}
    regimes = [[None] * xs.size for _ in range(taus.size)]
    for j, c in enumerate(cols):
        for i, msg in c[2].items():
            errors[(i, j)] = msg
            ratios[i, j] = np.nan
    for i in range(taus.size):
        for j in range(xs.size):
            regimes[i][j] = ERROR if (i, j) in errors else classify(ratios[i, j])
    return PhaseDiagram(taus, xs, x_param, gt, g0, ratios, regimes, errors)
