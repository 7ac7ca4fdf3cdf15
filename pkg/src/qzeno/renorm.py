"""Self-consistent level renormalization and the transformed-frame density.

The counter-rotating couplings are absorbed by a unitary transformation
whose displacement amplitudes depend on the renormalized spacing itself.
For bath ``i`` the factor solves

    eta_i = exp(-2 * integral_0^inf J_i(w) / (w + eta_i*delta)**2 dw)

and the qubit spacing becomes ``eta*delta`` with ``eta = prod(eta_i)``.
Downstream formulas use the effective density ``J(w) f(w)`` with
``f(w) = (2 eta delta / (w + eta delta))**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _backend
from .errors import ConvergenceError, DomainError, QuadratureError
from .quad import QuadSpec
from .spectra import CompositeSpectrum, Lorentzian, composite_density

CAVITY_REFERENCES = ("renormalized", "bare")
_ETA_FLOOR = 1e-12


def _eta_map_integral(bath, eta_delta, spec, coupling_scale):
    kind, *pars = bath.packed(coupling_scale)
    hints = list(bath.features()) + [(eta_delta, eta_delta)]
    p = _backend.Packed.build([kind], [pars], [-1.0], hints)
    value, _ = _backend.eta_integral(p, p.mask(), eta_delta, spec)
    return value


def solve_eta(bath, delta, spec=QuadSpec(), fp_tol=1e-12, max_iter=200, coupling_scale=1.0):
    """Fixed point of ``eta -> exp(-2 int J/(w + eta*delta)**2)`` for one bath.

    Iterates from ``eta = 1``; switches to half-step damping as soon as two
    successive updates change sign. Raises :class:`ConvergenceError` with the
    last iterate when ``max_iter`` is exhausted.
    """
    if not (math.isfinite(delta) and delta > 0):
        raise DomainError(f"delta must be positive, got {delta!r}")
    if bath.is_zero():
        return 1.0

    def step(eta):
        try:
            return math.exp(-2.0 * _eta_map_integral(bath, eta * delta, spec, coupling_scale))
        except (ArithmeticError, QuadratureError) as exc:
            raise ConvergenceError(f"renormalization map failed at eta={eta!r}: {exc}", last=eta) from exc

    eta = 1.0
    damping = 1.0
    prev_move = 0.0
    residual = math.inf
    for _ in range(max_iter):
        target = step(eta)
        move = target - eta
        residual = abs(move)
        if residual < fp_tol:
            return target if abs(step(target) - target) < fp_tol else eta
        if prev_move * move < 0:
            damping = 0.5
        eta = eta + damping * move
        if not 0 < eta <= 1:
            eta = min(max(eta, _ETA_FLOOR), 1.0)
        prev_move = move
    raise ConvergenceError(
        f"renormalization factor did not converge in {max_iter} iterations "
        f"(last {eta!r}, residual {residual:.3e}); coupling too strong for this transformation",
        last=eta, residual=residual)


def _scaled_cavity(comp, factor):
    return Lorentzian(comp.g, comp.omega_cav * factor, comp.lam * factor)


@dataclass(frozen=True)
class RenormalizedSystem:
    """Immutable transformed-frame description of a qubit coupled to baths.

    ``spectrum`` is the spectrum as given. With
    ``cavity_reference='renormalized'`` the cavity centre and width are
    quoted relative to the dressed spacing, so the density actually used is
    ``effective_spectrum`` (cavity scaled by ``eta``). ``eta_per_bath`` is in
    component order.
    """

    delta: float
    spectrum: CompositeSpectrum
    eta_per_bath: tuple
    eta: float
    rwa_mode: bool = False
    cavity_reference: str = "renormalized"
    per_bath_f: bool = False

    @property
    def eta_delta(self):
        return self.eta * self.delta

    @cached_property
    def effective_spectrum(self):
        idx = self.spectrum.cavity_index()
        if idx is None or self.cavity_reference == "bare" or self.eta == 1.0:
            return self.spectrum
        return self.spectrum.replace(idx, _scaled_cavity(self.spectrum.components[idx], self.eta))

    def f_references(self):
        """Spacing used in each component's counter-rotating factor (``-1`` disables it)."""
        n = len(self.spectrum)
        if self.rwa_mode:
            return np.full(n, -1.0)
        if self.per_bath_f:
            return np.array([e * self.delta for e in self.eta_per_bath])
        return np.full(n, self.eta_delta)

    @cached_property
    def hints(self):
        feats = []
        for c in self.effective_spectrum.components:
            if not c.is_zero():
                feats.extend(c.features())
        feats.append((self.eta_delta, self.eta_delta))
        return tuple(feats)

    @cached_property
    def packed(self):
        kinds, pars = self.effective_spectrum.pack()
        return _backend.Packed.build(kinds, pars, self.f_references(), self.hints)

    def quad_spec(self, spec=QuadSpec()):
        return spec.with_hints(self.hints)


def renormalize(spectrum, delta=1.0, rwa_mode=False, spec=QuadSpec(), *, cavity_reference="renormalized",
                per_bath_f=False, fp_tol=1e-12, max_iter=200):
    """Solve every bath's factor independently and return the system.

    In ``renormalized`` cavity mode the cavity factor depends on the dressed
    spacing through the scaled line, so an outer loop re-solves until the
    global factor is stationary to ``fp_tol``.
    """
    if not isinstance(spectrum, CompositeSpectrum):
        spectrum = CompositeSpectrum(tuple(spectrum))
    if cavity_reference not in CAVITY_REFERENCES:
        raise DomainError(f"cavity_reference must be one of {CAVITY_REFERENCES}, got {cavity_reference!r}")
    if not (math.isfinite(delta) and delta > 0):
        raise DomainError(f"delta must be positive, got {delta!r}")
    n = len(spectrum)
    if rwa_mode or n == 0:
        return RenormalizedSystem(delta, spectrum, (1.0,) * n, 1.0, bool(rwa_mode), cavity_reference, per_bath_f)
    comps = spectrum.components
    cav = spectrum.cavity_index()
    scale = spectrum.coupling_scale
    etas = [solve_eta(c, delta, spec, fp_tol, max_iter, scale) for c in comps]
    eta = math.prod(etas)
    if cav is not None and cavity_reference == "renormalized" and not comps[cav].is_zero():
        for _ in range(max_iter):
            new = solve_eta(_scaled_cavity(comps[cav], eta), delta, spec, fp_tol, max_iter, scale)
            etas[cav] = new
            new_eta = math.prod(etas)
            done = abs(new_eta - eta) < fp_tol
            eta = new_eta
            if done:
                break
        else:
            raise ConvergenceError("cavity reference loop did not settle", last=eta)
    return RenormalizedSystem(delta, spectrum, tuple(etas), eta, False, cavity_reference, per_bath_f)


def f_factor(sys, omega, component=None):
    """Counter-rotating factor ``(2 eta delta / (w + eta delta))**2``; 1 in RWA mode."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("f_factor is defined for omega >= 0")
    if sys.rwa_mode:
        out = np.ones_like(w)
    else:
        ref = sys.eta_delta if component is None or not sys.per_bath_f else sys.f_references()[component]
        out = (2.0 * ref / (w + ref)) ** 2
    return float(out) if out.ndim == 0 else out


def effective_density(sys, omega, per_bath=False):
    """``J(w) f(w)``; with ``per_bath`` also the list of per-component terms."""
    w = np.asarray(omega, dtype=float)
    total, parts = composite_density(sys.effective_spectrum, w)
    parts = [p * f_factor(sys, w, i) for i, p in enumerate(parts)]
    total = sum(parts) if parts else total
    if per_bath:
        return total, parts
    return total
