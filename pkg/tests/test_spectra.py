import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qzeno.errors import DomainError
from qzeno.quad import QuadSpec, integrate
from qzeno.spectra import (CompositeSpectrum, Lorentzian, LowFrequency, OhmicDrude, composite_density,
                           density_fractions, eval_density, feature_points)

positive = st.floats(1e-4, 10.0)
omegas = st.lists(st.floats(0.0, 50.0), min_size=1, max_size=20)


def test_lorentzian_peak_value():
    cav = Lorentzian(0.01, 1.0, 1e-3)
    assert eval_density(cav, 1.0) == pytest.approx(0.01 ** 2 / (math.pi * 1e-3), rel=1e-14)


def test_lorentzian_mass_on_half_line():
    # analytic: g^2 (1/2 + atan(wc/lam)/pi) over [0, inf)
    g, wc, lam = 0.01, 1.0, 1e-2
    cav = Lorentzian(g, wc, lam)
    spec = QuadSpec(hints=((wc, lam),))
    value, _ = integrate(lambda w: eval_density(cav, w), 0.0, np.inf, spec)
    assert value == pytest.approx(g ** 2 * (0.5 + math.atan(wc / lam) / math.pi), rel=1e-9)


def test_coupling_scale_multiplies_amplitude():
    cav = Lorentzian(0.01, 1.0, 1e-3)
    assert eval_density(cav, 1.0, coupling_scale=0.5) == pytest.approx(0.25 * eval_density(cav, 1.0))
    low = LowFrequency(1e-4, 0.1)
    assert eval_density(low, 0.3, coupling_scale=0.5) == eval_density(low, 0.3)


def test_low_frequency_and_ohmic_formulas():
    assert eval_density(LowFrequency(1e-4, 0.1), 0.2) == pytest.approx(2e-4 * 0.2 / (0.04 + 0.01))
    assert eval_density(OhmicDrude(1e-4, 10.0), 5.0) == pytest.approx(2e-4 * 5.0 / 1.25)


def test_q_factor_round_trip():
    cav = Lorentzian.from_q(0.01, 1.01, 1e4)
    assert cav.lam == pytest.approx(1.01e-4)
    assert cav.q_factor == pytest.approx(1e4)


@pytest.mark.parametrize("make", [
    lambda: Lorentzian(0.01, 1.0, 2.0),
    lambda: Lorentzian(-0.1, 1.0, 1e-3),
    lambda: Lorentzian(0.01, 0.0, 1e-3),
    lambda: LowFrequency(1e-4, 0.0),
    lambda: OhmicDrude(-1.0, 10.0),
])
def test_invalid_parameters(make):
    with pytest.raises(DomainError):
        make()


def test_negative_frequency_rejected():
    with pytest.raises(DomainError):
        eval_density(OhmicDrude(1e-4, 10.0), -1.0)


def test_feature_points():
    assert feature_points(Lorentzian(0.01, 1.0, 1e-3)) == [(1.0, 1e-3)]


def test_composite_cavity_index():
    spec = CompositeSpectrum((LowFrequency(1e-4, 0.1), Lorentzian(0.01, 1.0, 1e-3)))
    assert spec.cavity_index() == 1
    assert CompositeSpectrum((OhmicDrude(1e-4, 10.0),)).cavity_index() is None


@settings(max_examples=50, deadline=None)
@given(g=positive, wc=positive, lam=st.floats(1e-5, 1e-2), alpha=st.floats(0, 1e-2), wl=positive, w=omegas)
def test_composite_is_sum_and_nonnegative(g, wc, lam, alpha, wl, w):
    assume(wc > lam)
    spec = CompositeSpectrum((Lorentzian(g, wc, lam), LowFrequency(alpha, wl)))
    total, parts = composite_density(spec, np.array(w))
    assert np.all(total >= 0)
    np.testing.assert_allclose(total, parts[0] + parts[1], rtol=1e-14)


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(1e-6, 1e-2), wc=positive, w=st.floats(1e-3, 20.0))
def test_fractions_sum_to_one(alpha, wc, w):
    spec = CompositeSpectrum((Lorentzian(0.01, 1.0, 1e-3), OhmicDrude(alpha, wc)))
    fr = density_fractions(spec, w)
    assert sum(fr) == pytest.approx(1.0, rel=1e-12)
    assert all(0 <= f <= 1 for f in fr)
