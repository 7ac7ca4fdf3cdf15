"""Bath spectral densities.

Three closed forms are supported: the Lorentzian quasi-mode of a lossy
cavity, a low-frequency qubit bath, and an Ohmic bath with a Drude cutoff.
All energies are dimensionless (units of a reference spacing chosen by the
caller). A :class:`CompositeSpectrum` holds at most one cavity and at most
one intrinsic bath and adds their densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np

from .errors import DomainError

LORENTZIAN, LOW_FREQUENCY, OHMIC = 0, 1, 2


def component_density(kind, p0, p1, p2, w):
    """Closed-form density of one packed component.

    Works on scalars (also under numba) and on numpy arrays. Packing:
    Lorentzian ``(amplitude**2, center, width)``, low-frequency
    ``(alpha, omega_low, delta_ref)``, Ohmic ``(alpha, omega_c, unused)``.
    """
    if kind == LORENTZIAN:
        d = w - p1
        return p0 * p2 / (math.pi * (d * d + p2 * p2))
    if kind == LOW_FREQUENCY:
        x = w / p2
        y = p1 / p2
        return 2.0 * p0 * w / (x * x + y * y)
    x = w / p1
    return 2.0 * p0 * w / (1.0 + x * x)


def _positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a finite positive energy, got {value!r}")


def _nonnegative(name, value):
    if not (math.isfinite(value) and value >= 0):
        raise DomainError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class Lorentzian:
    """Cavity quasi-mode: ``g**2 * lam / (pi * ((w - omega_cav)**2 + lam**2))``."""

    g: float
    omega_cav: float
    lam: float

    kind: ClassVar[int] = LORENTZIAN
    is_cavity: ClassVar[bool] = True

    def __post_init__(self):
        _nonnegative("g", self.g)
        _positive("omega_cav", self.omega_cav)
        _positive("lam", self.lam)
        if not self.omega_cav / self.lam > 1:
            raise DomainError("quality factor omega_cav/lam must exceed 1")

    @classmethod
    def from_q(cls, g, omega_cav, q_factor):
        return cls(g, omega_cav, omega_cav / q_factor)

    @property
    def q_factor(self):
        return self.omega_cav / self.lam

    def packed(self, coupling_scale=1.0):
        return (self.kind, (coupling_scale * self.g) ** 2, self.omega_cav, self.lam)

    def features(self):
        return [(self.omega_cav, self.lam)]

    def is_zero(self):
        return self.g == 0


@dataclass(frozen=True)
class LowFrequency:
    """Low-frequency qubit bath: ``2 alpha w / ((w/delta_ref)**2 + (omega_low/delta_ref)**2)``."""

    alpha: float
    omega_low: float
    delta_ref: float = 1.0

    kind: ClassVar[int] = LOW_FREQUENCY
    is_cavity: ClassVar[bool] = False

    def __post_init__(self):
        _nonnegative("alpha", self.alpha)
        _positive("omega_low", self.omega_low)
        _positive("delta_ref", self.delta_ref)

    def packed(self, coupling_scale=1.0):
        return (self.kind, self.alpha, self.omega_low, self.delta_ref)

    def features(self):
        return [(self.omega_low, self.omega_low)]

    def is_zero(self):
        return self.alpha == 0


@dataclass(frozen=True)
class OhmicDrude:
    """Ohmic bath with Drude cutoff: ``2 alpha w / (1 + (w/omega_c)**2)``."""

    alpha: float
    omega_c: float

    kind: ClassVar[int] = OHMIC
    is_cavity: ClassVar[bool] = False

    def __post_init__(self):
        _nonnegative("alpha", self.alpha)
        _positive("omega_c", self.omega_c)

    def packed(self, coupling_scale=1.0):
        return (self.kind, self.alpha, self.omega_c, 0.0)

    def features(self):
        return [(self.omega_c, self.omega_c)]

    def is_zero(self):
        return self.alpha == 0


BathModel = Union[Lorentzian, LowFrequency, OhmicDrude]


def _check_omega(omega):
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise DomainError("spectral densities are defined for omega >= 0 only")
    return w


def eval_density(model, omega, coupling_scale=1.0):
    """J(omega) for one bath model; scalar in, float out."""
    w = _check_omega(omega)
    kind, p0, p1, p2 = model.packed(coupling_scale)
    out = component_density(kind, p0, p1, p2, w)
    return float(out) if out.ndim == 0 else out


def feature_points(model):
    """Quadrature hints ``[(position, width), ...]`` for a model or a composite."""
    if isinstance(model, CompositeSpectrum):
        return [fp for c in model.components for fp in c.features()]
    return model.features()


@dataclass(frozen=True)
class CompositeSpectrum:
    """Sum of bath densities; Lorentzian amplitudes are scaled by ``coupling_scale**2``."""

    components: tuple = ()
    coupling_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        _positive("coupling_scale", self.coupling_scale)
        n_cav = sum(1 for c in self.components if c.is_cavity)
        n_int = len(self.components) - n_cav
        if n_cav > 1:
            raise DomainError("at most one Lorentzian (cavity) component is allowed")
        if n_int > 1:
            raise DomainError("at most one intrinsic-bath component is allowed")

    def __len__(self):
        return len(self.components)

    def pack(self):
        """``(kinds, params)`` arrays consumed by the compiled kernels."""
        n = len(self.components)
        kinds = np.zeros(n, dtype=np.int64)
        pars = np.zeros((n, 3))
        for i, c in enumerate(self.components):
            kind, *p = c.packed(self.coupling_scale)
            kinds[i] = kind
            pars[i] = p
        return kinds, pars

    def cavity_index(self):
        for i, c in enumerate(self.components):
            if c.is_cavity:
                return i
        return None

    def replace(self, index, component):
        comps = list(self.components)
        comps[index] = component
        return CompositeSpectrum(tuple(comps), self.coupling_scale)


def composite_density(spec, omega):
    """Return ``(total, per_component)``; per-component values in component order."""
    w = _check_omega(omega)
    per = [eval_density(c, w, spec.coupling_scale) for c in spec.components]
    total = sum(per) if per else (0.0 if w.ndim == 0 else np.zeros_like(w))
    return total, per


def density_fractions(spec, omega):
    """Per-component share of the total density at ``omega`` (empty total gives zeros)."""
    total, per = composite_density(spec, omega)
    if total == 0:
        return [0.0 for _ in per]
    return [p / total for p in per]
