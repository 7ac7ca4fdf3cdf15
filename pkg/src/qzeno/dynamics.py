"""Time-domain survival of the excited qubit in the transformed frame.

Frequencies are offsets ``eps`` from the dressed spacing ``eta*delta``; a
bath mode at ``w`` sits at ``eps = w - eta*delta``. With the effective
density ``rho = J f`` the resolvent has level shift ``R(eps)`` (principal
value of ``rho(w)/(eps + eta delta - w)``) and half-width
``Gamma(eps) = pi rho(eps + eta delta)``. The survival amplitude is the
Fourier transform of the spectral function

    A(eps) = Gamma / (pi ((eps - R)**2 + Gamma**2)),   chi(t) = int A e^{i eps t}.

The ``e^{+i eps t}`` phase convention is kept throughout this module; the
exact oracle evolves with ``e^{-iHt}`` and returns the complex conjugate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

from . import _backend, quad
from .errors import ConvergenceError, DomainError
from .quad import QuadSpec
from .spectra import component_density
from .zeno import small_tau_slope

_DEG = 16
_CHEB_X = C.chebpts1(_DEG + 1)
_CHEB_INV = np.linalg.inv(C.chebvander(_CHEB_X, _DEG))
_GL_SIZES = (32, 64, 128, 256, 544)
_GL = [np.polynomial.legendre.leggauss(m) for m in _GL_SIZES]
_GL_VANDER = [C.chebvander(x, _DEG) for x, _ in _GL]
_BYPARTS_OMEGA = 4.0 * _DEG * _DEG


def _endpoint_derivatives():
    """``T_j^{(k)}(+1)`` and ``T_j^{(k)}(-1)`` as ``(k, j)`` matrices."""
    plus = np.zeros((_DEG + 1, _DEG + 1))
    minus = np.zeros((_DEG + 1, _DEG + 1))
    for j in range(_DEG + 1):
        c = np.zeros(j + 1)
        c[j] = 1.0
        for k in range(_DEG + 1):
            d = C.chebder(c, k) if k else c
            plus[k, j] = C.chebval(1.0, d) if d.size else 0.0
            minus[k, j] = C.chebval(-1.0, d) if d.size else 0.0
    return plus, minus


_DPLUS, _DMINUS = _endpoint_derivatives()
_CHEB_INTEGRALS = np.array([2.0 / (1 - j * j) if j % 2 == 0 else 0.0 for j in range(_DEG + 1)])


# -- self-energy ---------------------------------------------------------------------------------

def _packed(sys):
    p = sys.packed
    return p, p.mask()


def level_shift(sys, eps, spec=QuadSpec()):
    """``R(eps)`` for an array of rotated-frame offsets."""
    p, m = _packed(sys)
    eps = np.asarray(eps, dtype=float)
    flat = eps.ravel() + sys.eta_delta
    if p.kinds.size == 0:
        return np.zeros_like(eps)
    return _backend.level_shift(p, m, flat, spec).reshape(eps.shape)


def half_width(sys, eps):
    """``Gamma(eps) = pi rho(eps + eta delta)``, zero below the band edge."""
    p, m = _packed(sys)
    w = np.asarray(eps, dtype=float) + sys.eta_delta
    if p.kinds.size == 0:
        return np.zeros_like(w)
    return math.pi * _backend.rho_values(p, m, w)


def self_energy(sys, omega, spec=QuadSpec()):
    """``(R, Gamma)`` at rotated-frame offsets ``omega``; scalars in, floats out."""
    r = level_shift(sys, omega, spec)
    g = half_width(sys, omega)
    if np.ndim(omega) == 0:
        return float(r), float(g)
    return r, g


def effective_coupling(sys, spec=QuadSpec()):
    """``sqrt(int rho)``, the scale of dressed splittings."""
    if sys.packed.kinds.size == 0:
        return 0.0
    return math.sqrt(max(small_tau_slope(sys, spec), 0.0))


# -- real-axis poles -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Pole:
    """Real root of ``eps - R(eps)``.

    ``omega`` is the rotated-frame offset, ``width`` the half-width
    ``Gamma(omega)``, ``residue`` the weight ``1/(1 - R'(omega))``. ``flagged``
    marks roots whose residue falls outside ``(0, 1]``.
    """

    omega: float
    width: float
    residue: float
    flagged: bool
    eta_delta: float
    delta: float

    @property
    def lab_frequency(self):
        return self.eta_delta + self.omega

    @property
    def offset_from_delta(self):
        return self.eta_delta + self.omega - self.delta

    @property
    def decay(self):
        """Pole-approximation amplitude decay rate ``residue * width``."""
        return self.residue * self.width


def _feature_offsets(sys):
    pts = []
    for pos, wid in sys.hints:
        for m in (0.0, -1.0, 1.0, -3.0, 3.0):
            pts.append(pos + m * wid - sys.eta_delta)
    return pts


def _bisect(fn, lo, hi, flo, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_poles(sys, search_window=None, spec=QuadSpec(), n_brackets=200):
    """Real roots of ``eps - R(eps)`` inside ``search_window`` (rotated frame).

    The window defaults to ``±max(10 g_eff, 1e-3 eta delta)`` with
    ``g_eff = sqrt(int rho)``; it is cut into ``n_brackets`` pieces plus
    the spectral feature points, sign changes are bisected to ``1e-10 delta``.
    """
    if sys.packed.kinds.size == 0 or all(c.is_zero() for c in sys.spectrum.components):
        return [Pole(0.0, 0.0, 1.0, False, sys.eta_delta, sys.delta)]
    if search_window is None:
        half = max(10 * effective_coupling(sys, spec), 1e-3 * sys.eta_delta)
        search_window = (-half, half)
    lo, hi = map(float, search_window)
    if not lo < hi:
        raise DomainError("search window must satisfy lo < hi")
    grid = np.linspace(lo, hi, n_brackets + 1)
    extra = [x for x in _feature_offsets(sys) if lo < x < hi]
    grid = np.unique(np.concatenate([grid, extra]))
    vals = grid - level_shift(sys, grid, spec)

    def d(e):
        return e - float(level_shift(sys, np.array([e]), spec)[0])

    tol = 1e-10 * sys.delta
    step = 1e-6 * sys.delta
    poles = []
    for i in range(grid.size - 1):
        a, b, fa, fb = grid[i], grid[i + 1], vals[i], vals[i + 1]
        if fa == 0:
            root = a
        elif fa * fb < 0:
            root = _bisect(d, a, b, fa, tol)
        else:
            continue
        rp, rm = level_shift(sys, np.array([root + step, root - step]), spec)
        deriv = (rp - rm) / (2 * step)
        residue = 1.0 / (1.0 - deriv)
        width = float(half_width(sys, root))
        flagged = not (0 < residue <= 1)
        poles.append(Pole(float(root), width, float(residue), flagged, sys.eta_delta, sys.delta))
    if vals[-1] == 0:
        root = grid[-1]
        poles.append(Pole(float(root), float(half_width(sys, root)), math.nan, True, sys.eta_delta, sys.delta))
    return poles


# -- second-sheet resonances ---------------------------------------------------------------------

@dataclass(frozen=True)
class Resonance:
    """Zero of ``z - Sigma(z)`` on the second sheet, ``z = omega - i*width``.

    ``residue`` is complex; the physical amplitude is ``sum residue e^{-izt}``.
    """

    z: complex
    residue: complex
    eta_delta: float
    delta: float

    @property
    def omega(self):
        return self.z.real

    @property
    def width(self):
        return -self.z.imag

    @property
    def offset_from_delta(self):
        return self.eta_delta + self.z.real - self.delta


def _rho_complex(p, mask, w):
    out = np.zeros_like(w, dtype=complex)
    for i in np.flatnonzero(mask):
        j = component_density(p.kinds[i], p.pars[i, 0], p.pars[i, 1], p.pars[i, 2], w)
        if p.fref[i] > 0:
            j = j * (2.0 * p.fref[i] / (w + p.fref[i])) ** 2
        out = out + j
    return out


def continued_self_energy(sys, z, spec=QuadSpec()):
    """Self-energy continued from the upper half plane to ``z`` (second sheet below the axis)."""
    p, m = _packed(sys)
    zl = complex(z) + sys.eta_delta
    if zl.imag == 0:
        r = float(level_shift(sys, np.array([z.real]), spec)[0])
        return complex(r, -float(half_width(sys, z.real)))
    hints = list(sys.hints) + [(zl.real, abs(zl.imag))]
    qs = spec.with_hints(hints)
    first, _ = quad.integrate_semi_infinite(lambda w: _backend.rho_numpy(p, m, w) / (zl - w), 0.0, qs)
    if zl.imag < 0:
        first = first - 2j * math.pi * complex(_rho_complex(p, m, np.array([zl]))[0])
    return complex(first)


def find_resonances(sys, guesses=None, spec=QuadSpec(), tol=1e-12, max_iter=60):
    """Complex dressed resonances by secant iteration from the real poles."""
    if guesses is None:
        guesses = [pl.omega - 1j * max(pl.decay, 1e-9 * sys.delta)
                   for pl in find_poles(sys, spec=spec) if not pl.flagged]
    out = []
    h = 1e-6 * sys.delta

    def dfun(z):
        return z - continued_self_energy(sys, z, spec)

    for z0 in guesses:
        z0 = complex(z0)
        z1 = z0 + h * (1 - 1j)
        f0, f1 = dfun(z0), dfun(z1)
        for _ in range(max_iter):
            if f1 == f0:
                break
            z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
            z0, f0 = z1, f1
            z1, f1 = z2, dfun(z2)
            if abs(z1 - z0) <= tol * sys.delta:
                break
        else:
            raise ConvergenceError("resonance search did not converge", last=z1, residual=abs(f1))
        deriv = (continued_self_energy(sys, z1 + h, spec) - continued_self_energy(sys, z1 - h, spec)) / (2 * h)
        out.append(Resonance(z1, 1.0 / (1.0 - deriv), sys.eta_delta, sys.delta))
    return out


def pole_reconstruction(poles, t):
    """``sum_j residue_j exp(i omega_j t - decay_j t)`` in this module's phase convention."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for pl in poles:
        if isinstance(pl, Resonance):
            out += np.conj(pl.residue * np.exp(-1j * pl.z * t))
        elif not pl.flagged:
            out += pl.residue * np.exp(1j * pl.omega * t - pl.decay * t)
    return out


# -- spectral function ---------------------------------------------------------------------------

class SpectralFunction:
    """Piecewise Chebyshev table of ``A(eps)`` and its Fourier transform.

    Panels on ``[-eta delta, eps_hi]`` are bisected until the trailing
    coefficients of a degree-16 fit are negligible; the Fourier integral on
    each panel is then done by Gauss-Legendre (moderate ``h t``) or by exact
    integration by parts of the polynomial (large ``h t``). A bound state
    below the band edge enters as a discrete term; the mass beyond
    ``eps_hi`` is kept in ``tail_mass`` and counted in the norm only.
    """

    def __init__(self, sys, spec=QuadSpec(), tail_tol=1e-10, coef_tol=1e-13, max_panels=50000):
        self.sys = sys
        self.spec = spec
        self.lower = -sys.eta_delta
        self.discrete = []
        self.trivial = sys.packed.kinds.size == 0 or all(c.is_zero() for c in sys.spectrum.components)
        if self.trivial:
            self.discrete = [(0.0, 1.0)]
            self.edges = np.array([self.lower, self.lower + 1.0])
            self.coef = np.zeros((1, _DEG + 1))
            self.tail_mass = 0.0
            return
        self._find_bound_state()
        self.upper = self._upper_limit(tail_tol)
        self.edges, self.coef = self._build(coef_tol, max_panels)
        self.tail_mass = self._tail_mass()

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=float)
        r = level_shift(self.sys, eps, self.spec)
        g = half_width(self.sys, eps)
        out = g / (math.pi * ((eps - r) ** 2 + g * g))
        return np.where(g > 0, out, 0.0)

    def _find_bound_state(self):
        """Discrete state below the band edge, if ``eps - R`` turns positive there.

        A density finite at zero frequency makes ``R`` diverge
        logarithmically at the edge; the resulting state lies within
        ``exp(-1/rho(0))`` of it and has no weight at double precision, so
        the probe sits a hair below the edge.
        """
        probe = self.lower - 1e-9 * self.sys.delta
        d = lambda e: e - float(level_shift(self.sys, np.array([e]), self.spec)[0])  # noqa: E731
        if d(probe) <= 0:
            return
        lo = probe - 1.0
        while d(lo) > 0:
            lo = probe - 2 * (probe - lo)
        root = _bisect(d, lo, probe, d(lo), 1e-14 * self.sys.delta)
        p, m = _packed(self.sys)
        e_lab = root + self.sys.eta_delta
        qs = self.spec.with_hints(list(self.sys.hints) + [(0.0, abs(e_lab))])
        curv, _ = quad.integrate_semi_infinite(lambda w: _backend.rho_numpy(p, m, w) / (w - e_lab) ** 2, 0.0, qs)
        self.discrete.append((root, 1.0 / (1.0 + curv)))

    def _hint_edges(self):
        pts = [self.lower, self.upper]
        eps_hints = [(pos - self.sys.eta_delta, w) for pos, w in self.sys.hints]
        for pl in find_poles(self.sys, spec=self.spec):
            eps_hints.append((pl.omega, max(abs(pl.decay), 1e-9 * self.sys.delta)))
        pts.extend(quad.hint_breakpoints(eps_hints, self.lower, self.upper))
        return np.unique(np.array(pts))

    def _upper_limit(self, tail_tol):
        hi = max(10.0 * self.sys.eta_delta, max(p + 30 * w for p, w in self.sys.hints) - self.sys.eta_delta)
        for _ in range(60):
            a = float(self(np.array([hi]))[0])
            if a * hi < tail_tol:
                return hi
            hi *= 2.0
        return hi

    def _tail_mass(self):
        v, _ = quad.integrate_semi_infinite(lambda e: self(e), self.upper, self.spec.with_tol(1e-6, 1e-16))
        return float(v)

    def _build(self, coef_tol, max_panels):
        pending = list(zip(self._hint_edges()[:-1], self._hint_edges()[1:]))
        done_edges, done_coef = [], []
        while pending:
            if len(done_edges) + len(pending) > max_panels:
                raise ConvergenceError("spectral function needs too many panels")
            a = np.array([p[0] for p in pending])
            b = np.array([p[1] for p in pending])
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            x = (mid[:, None] + half[:, None] * _CHEB_X[None, :]).ravel()
            vals = self(x).reshape(a.size, _DEG + 1)
            coef = vals @ _CHEB_INV.T
            trail = np.abs(coef[:, -1]) + np.abs(coef[:, -2])
            scale = np.abs(coef).max(axis=1)
            ok = (trail * half <= coef_tol) | (trail <= 1e-12 * scale) | (half <= 1e-13 * max(1.0, abs(self.lower)))
            nxt = []
            for i in range(a.size):
                if ok[i]:
                    done_edges.append((a[i], b[i]))
                    done_coef.append(coef[i])
                else:
                    nxt.append((a[i], mid[i]))
                    nxt.append((mid[i], b[i]))
            pending = nxt
        order = np.argsort([e[0] for e in done_edges])
        edges = np.array([done_edges[i] for i in order])
        return edges, np.array([done_coef[i] for i in order])

    @property
    def continuum_mass(self):
        half = 0.5 * (self.edges[:, 1] - self.edges[:, 0])
        return float(np.sum(half * (self.coef @ _CHEB_INTEGRALS)))

    @property
    def norm(self):
        """Total weight: continuum table, tail beyond the table, discrete states."""
        if self.trivial:
            return 1.0
        return self.continuum_mass + self.tail_mass + sum(w for _, w in self.discrete)

    def check_norm(self, tol=1e-6):
        if abs(self.norm - 1.0) > tol:
            raise ConvergenceError(f"spectral weight {self.norm:.9f} differs from 1 by more than {tol:g}")
        return self.norm

    def amplitude(self, t):
        """``chi(t)`` for scalar or array ``t >= 0``."""
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(ts < 0):
            raise DomainError("times must be non-negative")
        out = np.array([self._amp(tt) for tt in ts])
        if np.ndim(t) == 0:
            return complex(out[0])
        return out

    def _amp(self, t):
        total = sum(w * np.exp(1j * e * t) for e, w in self.discrete) + 0j
        if self.trivial:
            return total
        a, b = self.edges[:, 0], self.edges[:, 1]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        om = half * t
        phase = np.exp(1j * mid * t)
        J = np.zeros(a.size, dtype=complex)
        big = om > _BYPARTS_OMEGA
        assigned = big.copy()
        for (x, w), V, m in zip(_GL, _GL_VANDER, _GL_SIZES):
            sel = ~assigned & (om / 2 + 24 <= m)
            if m == _GL_SIZES[-1]:
                sel = ~assigned
            if sel.any():
                vals = self.coef[sel] @ V.T
                J[sel] = (vals * np.exp(1j * om[sel, None] * x[None, :])) @ w
                assigned |= sel
        if big.any():
            o = om[big]
            c = self.coef[big]
            dp = c @ _DPLUS.T
            dm = c @ _DMINUS.T
            k = np.arange(_DEG + 1)
            sign = (-1.0) ** k
            denom = (1j * o[:, None]) ** (k[None, :] + 1)
            ep, em = np.exp(1j * o), np.exp(-1j * o)
            J[big] = np.sum(sign * (dp * ep[:, None] - dm * em[:, None]) / denom, axis=1)
        return total + np.sum(half * phase * J)


@lru_cache(maxsize=16)
def spectral_function(sys, spec=QuadSpec()):
    return SpectralFunction(sys, spec)


def survival_amplitude(sys, t, spec=QuadSpec()):
    """``chi(t) = int A(eps) e^{i eps t} d eps``."""
    return spectral_function(sys, spec).amplitude(t)


# -- traces --------------------------------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionTrace:
    times: np.ndarray
    probabilities: np.ndarray
    measured: bool
    tau: float | None = None
    fitted_rate: float | None = None


def _coupling_scale_for_warning(sys, spec):
    idx = sys.spectrum.cavity_index()
    if idx is not None:
        return sys.spectrum.coupling_scale * sys.spectrum.components[idx].g
    return effective_coupling(sys, spec)


def unmeasured_trace(sys, times, spec=QuadSpec()):
    times = np.asarray(times, dtype=float)
    p = np.abs(survival_amplitude(sys, times, spec)) ** 2
    return EvolutionTrace(times, np.clip(p, 0.0, 1.0), False)


def measured_trace(sys, tau, n_measurements, spec=QuadSpec()):
    """``P(k tau) = |chi(tau)|^(2k)`` for ``k = 0..n`` and the fitted rate."""
    if not tau > 0:
        raise DomainError("tau must be positive")
    if n_measurements < 1:
        raise DomainError("need at least one measurement")
    g = _coupling_scale_for_warning(sys, spec)
    if g > 0 and tau >= 0.1 / g:
        warnings.warn(f"tau={tau:g} is not short against the coupling time 1/g={1 / g:g}; "
                      "the per-interval survival is no longer perturbative", RuntimeWarning, stacklevel=2)
    p1 = min(abs(survival_amplitude(sys, tau, spec)) ** 2, 1.0)
    k = np.arange(n_measurements + 1)
    probs = p1 ** k
    rate = -math.log(p1) / tau if p1 > 0 else math.inf
    return EvolutionTrace(k * tau, probs, True, float(tau), rate)


def measured_probability(sys, tau, times, spec=QuadSpec()):
    """Survival under projections every ``tau``: ``|chi(tau)|^(2k) |chi(t - k tau)|^2``, ``k = floor(t / tau)``."""
    if not tau > 0:
        raise DomainError("tau must be positive")
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise DomainError("times must be non-negative")
    k = np.floor(times / tau * (1 + 1e-12))
    rest = np.maximum(times - k * tau, 0.0)
    p1 = min(abs(survival_amplitude(sys, tau, spec)) ** 2, 1.0)
    within = np.clip(np.abs(survival_amplitude(sys, rest, spec)) ** 2, 0.0, 1.0)
    return EvolutionTrace(times, p1 ** k * within, True, float(tau), -math.log(p1) / tau if p1 > 0 else math.inf)


def rwa_benchmark(g, kappa, gamma, t):
    """``cos(g t) exp(-(kappa + gamma) t / 2)``, reported raw (it can go negative)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    out = np.cos(g * t) * np.exp(-(kappa + gamma) * t / 2)
    return float(out) if out.ndim == 0 else out
