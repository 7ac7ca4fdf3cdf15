"""Numba kernels for the hot loops.

The spectrum arrives packed: ``kinds`` (int64), ``pars`` (n, 3), ``fref``
(per-component spacing used in the counter-rotating factor, <= 0 disables
it) and ``mask`` (components to include). Integrands are selected by an
integer mode so one compiled adaptive integrator serves all of them.
"""

import math

import numpy as np

from ._jit import njit
from .quad import NODES, WG, WK
from .spectra import component_density

RHO, RATE, TAIL, ETA, PV_OUT, PV_FOLD = 0, 1, 2, 3, 4, 5

_EPS = np.finfo(np.float64).eps
_TINY = np.finfo(np.float64).tiny

_density = njit(component_density)


@njit
def rho(x, kinds, pars, fref, mask):
    s = 0.0
    for i in range(kinds.size):
        if mask[i]:
            j = _density(kinds[i], pars[i, 0], pars[i, 1], pars[i, 2], x)
            fr = fref[i]
            if fr > 0.0:
                q = 2.0 * fr / (x + fr)
                j *= q * q
            s += j
    return s


@njit
def sinc2(x, tau):
    if abs(x * tau) < 1e-8:
        return tau / (2.0 * math.pi)
    s = math.sin(0.5 * x * tau)
    return 2.0 * s * s / (math.pi * x * x * tau)


@njit
def _integrand(mode, x, kinds, pars, fref, mask, c, tau):
    if mode == PV_FOLD:
        return (rho(c - x, kinds, pars, fref, mask) - rho(c + x, kinds, pars, fref, mask)) / x
    r = rho(x, kinds, pars, fref, mask)
    if mode == RHO:
        return r
    if mode == RATE:
        return r * sinc2(x - c, tau)
    if mode == TAIL:
        d = x - c
        return r / (math.pi * tau * d * d)
    if mode == ETA:
        d = x + c
        return r / (d * d)
    return r / (c - x)


@njit
def _eval(mode, x, ma, ms, kinds, pars, fref, mask, c, tau):
    if ms > 0.0:
        om = 1.0 - x
        if om <= 0.0:
            return 0.0
        return _integrand(mode, ma + ms * x / om, kinds, pars, fref, mask, c, tau) * ms / (om * om)
    return _integrand(mode, x, kinds, pars, fref, mask, c, tau)


@njit
def _gk15(mode, a, b, ma, ms, kinds, pars, fref, mask, c, tau):
    cen = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fv = np.empty(15)
    resk = 0.0
    resg = 0.0
    resabs = 0.0
    for k in range(15):
        v = _eval(mode, cen + h * NODES[k], ma, ms, kinds, pars, fref, mask, c, tau)
        fv[k] = v
        resk += WK[k] * v
        resg += WG[k] * v
        resabs += WK[k] * abs(v)
    mean = 0.5 * resk
    resasc = 0.0
    for k in range(15):
        resasc += WK[k] * abs(fv[k] - mean)
    ah = abs(h)
    err = abs((resk - resg) * h)
    resabs *= ah
    resasc *= ah
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > _TINY / (50.0 * _EPS):
        err = max(50.0 * _EPS * resabs, err)
    return resk * h, err


@njit
def adaptive(mode, edges, ma, ms, kinds, pars, fref, mask, c, tau, rtol, atol, limit):
    """Global adaptive GK15 over panels ``edges``; returns ``(value, error, ier)``."""
    n = edges.size - 1
    cap = n + limit
    A = np.empty(cap)
    B = np.empty(cap)
    R = np.empty(cap)
    E = np.empty(cap)
    for i in range(n):
        A[i] = edges[i]
        B[i] = edges[i + 1]
        R[i], E[i] = _gk15(mode, A[i], B[i], ma, ms, kinds, pars, fref, mask, c, tau)
    stuck = 0.0
    ier = 0
    while True:
        total = 0.0
        etot = stuck
        imax = -1
        emax = -1.0
        for i in range(n):
            total += R[i]
            etot += E[i]
            if E[i] > emax:
                emax = E[i]
                imax = i
        tol = max(atol, rtol * abs(total))
        if etot <= tol:
            return total, etot, ier
        if imax < 0 or emax <= 0.0:
            return total, etot, 3 if etot > 100.0 * tol else ier
        if n >= cap:
            return total, etot, 1
        a = A[imax]
        b = B[imax]
        m = 0.5 * (a + b)
        if b - a <= 64.0 * _EPS * max(abs(a), abs(b)) or m <= a or m >= b:
            stuck += E[imax]
            E[imax] = 0.0
            continue
        A[imax] = a
        B[imax] = m
        R[imax], E[imax] = _gk15(mode, a, m, ma, ms, kinds, pars, fref, mask, c, tau)
        A[n] = m
        B[n] = b
        R[n], E[n] = _gk15(mode, m, b, ma, ms, kinds, pars, fref, mask, c, tau)
        n += 1


@njit
def _breaks_between(breaks, lo, hi):
    i0 = np.searchsorted(breaks, lo, side="right")
    i1 = np.searchsorted(breaks, hi, side="left")
    m = max(i1 - i0, 0)
    out = np.empty(m + 2)
    out[0] = lo
    for k in range(m):
        out[k + 1] = breaks[i0 + k]
    out[m + 1] = hi
    return out


@njit
def _semi_edges(breaks, a, s):
    """Panel edges in the mapped variable for ``[a, inf)``."""
    i0 = np.searchsorted(breaks, a, side="right")
    m = breaks.size - i0
    tmp = np.empty(m + 5)
    tmp[0] = 0.0
    for k in range(m):
        x = breaks[i0 + k] - a
        tmp[k + 1] = x / (x + s)
    tmp[m + 1] = 0.5
    tmp[m + 2] = 0.9
    tmp[m + 3] = 0.99
    tmp[m + 4] = 1.0
    return np.unique(tmp)


@njit
def semi_infinite(mode, a, s, breaks, kinds, pars, fref, mask, c, tau, rtol, atol, limit):
    edges = _semi_edges(breaks, a, s)
    return adaptive(mode, edges, a, s, kinds, pars, fref, mask, c, tau, rtol, atol, limit)


@njit
def _past_features(x, center, period, hpos, hwid):
    side = 1.0 if x >= center else -1.0
    for i in range(hpos.size):
        if hwid[i] >= 4.0 * period:
            continue
        if side * (x - hpos[i]) > 10.0 * period + 30.0 * hwid[i]:
            continue
        if side * (hpos[i] - center) < 0.0:
            continue
        return False
    return True


@njit
def rate_integral(kinds, pars, fref, mask, center, tau, breaks, hpos, hwid, scale,
                  rtol, atol, limit, max_chunks):
    """Integral over [0, inf) of rho(x) * F(x - center, tau); ``(value, error, ier)``."""
    period = 2.0 * math.pi / tau
    total = 0.0
    err = 0.0
    ier = 0
    k = 0
    while True:
        hi = center - k * period
        if hi <= 0.0:
            break
        lo = max(center - (k + 1) * period, 0.0)
        v, e, i2 = adaptive(RATE, _breaks_between(breaks, lo, hi), 0.0, 0.0,
                            kinds, pars, fref, mask, center, tau, rtol, atol, limit)
        total += v
        err += e
        ier = max(ier, i2)
        k += 1
    k = 0
    while True:
        lo = center + k * period
        hi = lo + period
        v, e, i2 = adaptive(RATE, _breaks_between(breaks, lo, hi), 0.0, 0.0,
                            kinds, pars, fref, mask, center, tau, rtol, atol, limit)
        total += v
        err += e
        ier = max(ier, i2)
        k += 1
        if k > 1 and _past_features(hi, center, period, hpos, hwid):
            dist = hi - center
            h1 = abs(_integrand(TAIL, hi, kinds, pars, fref, mask, center, tau))
            h0 = abs(_integrand(TAIL, lo, kinds, pars, fref, mask, center, tau))
            slope = max(abs(h1 - h0) / period, 2.0 * h1 / dist)
            bound = 4.0 * slope / (tau * tau)
            if bound <= 0.1 * max(atol, rtol * abs(total)):
                tv, te, i3 = semi_infinite(TAIL, hi, max(scale, hi), breaks, kinds, pars, fref, mask,
                                           center, tau, rtol, atol, limit)
                return total + tv, err + te + bound, max(ier, i3)
        if k > max_chunks:
            return total, err, 2


@njit
def rho_integral(kinds, pars, fref, mask, breaks, scale, rtol, atol, limit):
    return semi_infinite(RHO, 0.0, scale, breaks, kinds, pars, fref, mask, 0.0, 1.0, rtol, atol, limit)


@njit
def eta_integral(kinds, pars, mask, eta_delta, breaks, scale, rtol, atol, limit):
    fref = np.full(kinds.size, -1.0)
    return semi_infinite(ETA, 0.0, scale, breaks, kinds, pars, fref, mask, eta_delta, 1.0, rtol, atol, limit)


@njit
def _fold_breaks(hpos, hwid, E, d):
    pts = np.empty(hpos.size * 9)
    n = 0
    for i in range(hpos.size):
        for m in (0.0, 1.0, -1.0, 3.0, -3.0, 10.0, -10.0, 30.0, -30.0):
            s = abs(hpos[i] + m * hwid[i] - E)
            if 0.0 < s < d:
                pts[n] = s
                n += 1
    out = np.empty(n + 2)
    out[0] = 0.0
    for k in range(n):
        out[k + 1] = pts[k]
    out[n + 1] = d
    return np.unique(out)


@njit
def pv_value(E, kinds, pars, fref, mask, breaks, hpos, hwid, scale, rtol, atol, limit):
    """Principal value of the integral over [0, inf) of rho(w)/(E - w).

    ``E +- x`` is only resolved to ``eps E``; across a line of width ``lam``
    that rounding moves ``rho`` by ``eps E rho / lam``, so the absolute
    tolerance is floored there.
    """
    steep = 0.0
    for i in range(hpos.size):
        if hwid[i] > 0.0 and hpos[i] >= 0.0:
            steep = max(steep, rho(hpos[i], kinds, pars, fref, mask) / hwid[i])
    atol = max(atol, 32.0 * _EPS * abs(E) * steep)
    if E <= 0.0:
        v, e, ier = semi_infinite(PV_OUT, 0.0, scale, breaks, kinds, pars, fref, mask, E, 1.0, rtol, atol, limit)
        return v, e, ier
    d = 0.5 * E
    vi, ei, i1 = adaptive(PV_FOLD, _fold_breaks(hpos, hwid, E, d), 0.0, 0.0,
                          kinds, pars, fref, mask, E, 1.0, rtol, atol, limit)
    vl, el, i2 = adaptive(PV_OUT, _breaks_between(breaks, 0.0, E - d), 0.0, 0.0,
                          kinds, pars, fref, mask, E, 1.0, rtol, atol, limit)
    vr, er, i3 = semi_infinite(PV_OUT, E + d, max(scale, E), breaks, kinds, pars, fref, mask,
                               E, 1.0, rtol, atol, limit)
    return vi + vl + vr, ei + el + er, max(i1, max(i2, i3))


@njit
def pv_batch(Es, kinds, pars, fref, mask, breaks, hpos, hwid, scale, rtol, atol, limit):
    out = np.empty(Es.size)
    errs = np.empty(Es.size)
    ier = 0
    for i in range(Es.size):
        out[i], errs[i], i2 = pv_value(Es[i], kinds, pars, fref, mask, breaks, hpos, hwid, scale,
                                       rtol, atol, limit)
        ier = max(ier, i2)
    return out, errs, ier


@njit
def rho_batch(xs, kinds, pars, fref, mask):
    out = np.empty(xs.size)
    for i in range(xs.size):
        out[i] = rho(xs[i], kinds, pars, fref, mask) if xs[i] >= 0.0 else 0.0
    return out


@njit
def _secular(mu, origin, d, v2):
    """``E - sum v2/(E - d)`` and ``sum v2/(E - d)**2`` at ``E = origin + mu``."""
    s = 0.0
    s2 = 0.0
    for k in range(d.size):
        den = (origin - d[k]) + mu
        q = v2[k] / den
        s += q
        s2 += q / den
    return origin + mu - s, s2


@njit
def _bisect_root(origin, lo, hi, d, v2):
    """Root of the increasing secular function for ``mu`` in ``(lo, hi)``."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g, _ = _secular(mid, origin, d, v2)
        if g > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 2.0 * _EPS * max(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


@njit
def arrowhead_spectrum(d, v2):
    """Eigenvalues of ``[[0, v], [v, diag(d)]]`` and their weight on the first state.

    ``d`` strictly increasing, ``v2 = v**2 > 0``. Every eigenvalue is the
    unique root of the secular equation in one gap of ``d``; roots are
    solved as offsets ``mu`` from the nearer pole ``d[org]`` to keep
    relative accuracy. Returns ``(E, W, org, mu)``.
    """
    K = d.size
    E = np.empty(K + 1)
    W = np.empty(K + 1)
    org = np.empty(K + 1, dtype=np.int64)
    mus = np.empty(K + 1)
    total = 0.0
    for k in range(K):
        total += v2[k]
    span = math.sqrt(total) + (d[K - 1] - d[0]) + 1.0
    for j in range(K + 1):
        if j == 0:
            o = 0
            lo = -span
            while _secular(lo, d[o], d, v2)[0] > 0.0:
                lo *= 2.0
            mu = _bisect_root(d[o], lo, 0.0, d, v2)
        elif j == K:
            o = K - 1
            hi = span
            while _secular(hi, d[o], d, v2)[0] < 0.0:
                hi *= 2.0
            mu = _bisect_root(d[o], 0.0, hi, d, v2)
        else:
            gap = d[j] - d[j - 1]
            g, _ = _secular(0.5 * gap, d[j - 1], d, v2)
            if g > 0.0:
                o = j - 1
                mu = _bisect_root(d[o], 0.0, 0.5 * gap, d, v2)
            else:
                o = j
                mu = _bisect_root(d[o], -0.5 * gap, 0.0, d, v2)
        _, s2 = _secular(mu, d[o], d, v2)
        E[j] = d[o] + mu
        W[j] = 1.0 / (1.0 + s2)
        org[j] = o
        mus[j] = mu
    return E, W, org, mus


@njit
def arrowhead_state(d, v, E, W, org, mus, t):
    """First-state amplitude and bath amplitudes at time ``t`` from the first state.

    ``beta_k = sum_j W_j v_k e^{-i E_j t} / (E_j - d_k)`` with the denominator
    rebuilt from the pole offsets.
    """
    K = d.size
    ph = np.empty(K + 1, dtype=np.complex128)
    chi = 0.0 + 0.0j
    for j in range(K + 1):
        ph[j] = W[j] * np.exp(-1j * E[j] * t)
        chi += ph[j]
    beta = np.zeros(K, dtype=np.complex128)
    for k in range(K):
        acc = 0.0 + 0.0j
        for j in range(K + 1):
            den = (d[org[j]] - d[k]) + mus[j]
            acc += ph[j] / den
        beta[k] = v[k] * acc
    return chi, beta
