"""Dispatch between the numba kernels and the vectorized numpy path.

Both routes consume the same :class:`Packed` description of the effective
density ``J(w) f(w)`` and must agree to quadrature tolerance; the
equivalence tests and the benchmark exercise both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _jit
from . import quad
from .errors import QuadratureError
from .spectra import component_density

_MAX_CHUNKS = 1 << 18


@dataclass(frozen=True, eq=False)
class Packed:
    """Flat arrays describing ``sum_i J_i(w) f_i(w)``.

    ``fref[i]`` is the spacing entering the counter-rotating factor of
    component ``i`` (``<= 0`` means no factor). ``hpos``/``hwid`` are the
    feature hints, ``breaks`` their sorted split points.
    """

    kinds: np.ndarray
    pars: np.ndarray
    fref: np.ndarray
    hpos: np.ndarray
    hwid: np.ndarray
    breaks: np.ndarray
    scale: float

    @classmethod
    def build(cls, kinds, pars, fref, hints):
        hints = list(hints)
        hpos = np.array([p for p, _ in hints], dtype=float)
        hwid = np.array([w for _, w in hints], dtype=float)
        breaks = quad.hint_breakpoints(hints, 0.0, np.inf)
        scale = quad.semi_infinite_scale(0.0, hints)
        return cls(np.asarray(kinds, dtype=np.int64), np.asarray(pars, dtype=float).reshape(-1, 3),
                   np.asarray(fref, dtype=float), hpos, hwid, np.ascontiguousarray(breaks), float(scale))

    @property
    def hints(self):
        return tuple(zip(self.hpos.tolist(), self.hwid.tolist()))

    def mask(self, which=None):
        m = np.zeros(self.kinds.size, dtype=np.bool_)
        if which is None:
            m[:] = True
        else:
            m[which] = True
        return m


def rho_numpy(p, mask, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for i in np.flatnonzero(mask):
        j = component_density(p.kinds[i], p.pars[i, 0], p.pars[i, 1], p.pars[i, 2], x)
        fr = p.fref[i]
        if fr > 0:
            j = j * (2.0 * fr / (x + fr)) ** 2
        out = out + j
    return out


def _kernels():
    from . import _kernels as k
    return k


def _use_numba():
    return _jit.backend() == "numba"


def _check(ier, value, error, what):
    if ier:
        raise QuadratureError(f"{what}: quadrature did not converge (code {ier})", value=value, error=error)
    return value, error


def rho_values(p, mask, x):
    x = np.asarray(x, dtype=float)
    if _use_numba():
        flat = np.ascontiguousarray(x.ravel())
        return _kernels().rho_batch(flat, p.kinds, p.pars, p.fref, mask).reshape(x.shape)
    return np.where(x >= 0, rho_numpy(p, mask, np.maximum(x, 0.0)), 0.0)


def rate_integral(p, mask, center, tau, spec):
    """``(value, error)`` of the integral over [0, inf) of ``rho(w) F(w - center, tau)``."""
    if _use_numba():
        v, e, ier = _kernels().rate_integral(p.kinds, p.pars, p.fref, mask, float(center), float(tau),
                                             p.breaks, p.hpos, p.hwid, p.scale, spec.rel_tol,
                                             spec.abs_tol, spec.max_subdivisions, _MAX_CHUNKS)
        return _check(ier, v, e, "rate integral")

    def integrand(w):
        x = w - center
        return rho_numpy(p, mask, w) * sinc2_numpy(x, tau)

    def tail(w):
        x = w - center
        return rho_numpy(p, mask, w) / (math.pi * tau * x * x)

    return quad.oscillatory_integrate(integrand, center, 2 * math.pi / tau, spec.with_hints(p.hints),
                                      lower=0.0, tail=tail, max_chunks=_MAX_CHUNKS)


def sinc2_numpy(x, tau):
    x = np.asarray(x, dtype=float)
    small = np.abs(x * tau) < 1e-8
    xs = np.where(small, 1.0, x)
    val = 2.0 * np.sin(0.5 * xs * tau) ** 2 / (math.pi * xs * xs * tau)
    return np.where(small, tau / (2 * math.pi), val)


def rho_integral(p, mask, spec):
    if _use_numba():
        v, e, ier = _kernels().rho_integral(p.kinds, p.pars, p.fref, mask, p.breaks, p.scale,
                                            spec.rel_tol, spec.abs_tol, spec.max_subdivisions)
        return _check(ier, v, e, "density integral")
    return quad.integrate_semi_infinite(lambda w: rho_numpy(p, mask, w), 0.0, spec.with_hints(p.hints))


def eta_integral(p, mask, eta_delta, spec):
    """Integral over [0, inf) of ``J(w) / (w + eta_delta)**2`` (no counter-rotating factor)."""
    if _use_numba():
        v, e, ier = _kernels().eta_integral(p.kinds, p.pars, mask, float(eta_delta), p.breaks, p.scale,
                                            spec.rel_tol, spec.abs_tol, spec.max_subdivisions)
        return _check(ier, v, e, "renormalization integral")
    bare = Packed(p.kinds, p.pars, np.full(p.kinds.size, -1.0), p.hpos, p.hwid, p.breaks, p.scale)
    return quad.integrate_semi_infinite(lambda w: rho_numpy(bare, mask, w) / (w + eta_delta) ** 2, 0.0,
                                        spec.with_hints(p.hints))


def level_shift(p, mask, energies, spec):
    """Principal value of the integral over [0, inf) of ``rho(w) / (E - w)`` for each ``E``."""
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    if _use_numba():
        v, e, ier = _kernels().pv_batch(np.ascontiguousarray(E), p.kinds, p.pars, p.fref, mask, p.breaks,
                                        p.hpos, p.hwid, p.scale, spec.rel_tol, spec.abs_tol,
                                        spec.max_subdivisions)
        _check(ier, v, e, "level shift")
        return v
    hspec = spec.with_hints(p.hints)

    def f(w):
        return rho_numpy(p, mask, w)

    out = np.empty(E.size)
    for i, e in enumerate(E):
        if e > 0:
            right = quad.integrate_semi_infinite(lambda w: f(w) / (w - e), 2 * e, hspec)[0]
            out[i] = -(quad.principal_value(f, e, 0.0, 2 * e, hspec) + right)
        else:
            out[i] = -quad.integrate_semi_infinite(lambda w: f(w) / (w - e), 0.0, hspec)[0]
    return out


@dataclass(frozen=True, eq=False)
class ArrowheadEigen:
    """Spectrum of the single-excitation matrix; ``vecs`` only on the numpy route."""

    energies: np.ndarray
    weights: np.ndarray
    origin: np.ndarray | None = None
    offset: np.ndarray | None = None
    vecs: np.ndarray | None = None


def arrowhead_decompose(d, v2):
    """Eigen-energies and ``|<0|E>|**2`` weights of ``[[0, v], [v, diag(d)]]``."""
    d = np.ascontiguousarray(d, dtype=float)
    v2 = np.ascontiguousarray(v2, dtype=float)
    if _use_numba():
        E, W, org, mu = _kernels().arrowhead_spectrum(d, v2)
        return ArrowheadEigen(E, W, org, mu)
    n = d.size + 1
    h = np.zeros((n, n))
    h[0, 1:] = h[1:, 0] = np.sqrt(v2)
    h[np.arange(1, n), np.arange(1, n)] = d
    vals, vecs = np.linalg.eigh(h)
    return ArrowheadEigen(vals, vecs[0] ** 2, vecs=vecs)


def arrowhead_state(eig, d, v, t):
    """``(chi, beta)`` after time ``t`` from the first basis state."""
    if eig.vecs is None:
        return _kernels().arrowhead_state(np.ascontiguousarray(d, dtype=float), np.ascontiguousarray(v, dtype=float),
                                          eig.energies, eig.weights, eig.origin, eig.offset, float(t))
    amp = eig.vecs @ (eig.vecs[0] * np.exp(-1j * eig.energies * t))
    return complex(amp[0]), amp[1:]
