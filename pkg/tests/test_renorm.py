import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qzeno.errors import ConvergenceError, DomainError
from qzeno.quad import QuadSpec
from qzeno.renorm import effective_density, f_factor, renormalize, solve_eta
from qzeno.spectra import CompositeSpectrum, Lorentzian, LowFrequency, OhmicDrude

from .conftest import cavity_low

# independent mpmath values (tests/oracles/derive_values.py)
ETA_LOW = 0.999378611795879
ETA_OHMIC = 0.999378991703568
ETA_CAVITY_BARE = 0.999949998750164
TABLE_ETA_CAV = 0.999950461636075
TABLE_ETA = 0.999329104214509


def test_eta_low_frequency():
    assert solve_eta(LowFrequency(1e-4, 0.1), 1.0) == pytest.approx(ETA_LOW, abs=1e-12)


def test_eta_ohmic():
    assert solve_eta(OhmicDrude(1e-4, 10.0), 1.0) == pytest.approx(ETA_OHMIC, abs=1e-12)


def test_eta_cavity():
    assert solve_eta(Lorentzian(0.01, 1.0, 1e-4), 1.0) == pytest.approx(ETA_CAVITY_BARE, abs=1e-12)


def test_renormalized_cavity_reference_loop():
    sys = renormalize(cavity_low())
    assert sys.eta_per_bath[0] == pytest.approx(TABLE_ETA_CAV, abs=1e-12)
    assert sys.eta_per_bath[1] == pytest.approx(ETA_LOW, abs=1e-12)
    assert sys.eta == pytest.approx(TABLE_ETA, abs=1e-12)
    assert sys.effective_spectrum.components[0].omega_cav == pytest.approx(1.01 * sys.eta)


def test_bare_reference_keeps_line():
    sys = renormalize(cavity_low(), cavity_reference="bare")
    assert sys.effective_spectrum == sys.spectrum


def test_zero_bath_is_identity():
    assert solve_eta(OhmicDrude(0.0, 10.0), 1.0) == 1.0
    sys = renormalize(CompositeSpectrum((Lorentzian(0.0, 1.0, 1e-3),)))
    assert sys.eta == 1.0


def test_rwa_mode():
    sys = renormalize(cavity_low(), rwa_mode=True)
    assert sys.eta == 1.0
    assert f_factor(sys, 0.3) == 1.0


def test_f_factor_is_one_at_dressed_spacing(table_system):
    assert f_factor(table_system, table_system.eta_delta) == pytest.approx(1.0, rel=1e-15)
    assert f_factor(table_system, 0.0) == pytest.approx(4.0)


def test_effective_density_matches_parts(table_system):
    w = np.linspace(0.0, 3.0, 50)
    total, parts = effective_density(table_system, w, per_bath=True)
    np.testing.assert_allclose(total, parts[0] + parts[1], rtol=1e-14)


def test_per_bath_f_uses_own_factor():
    sys = renormalize(cavity_low(), per_bath_f=True)
    refs = sys.f_references()
    np.testing.assert_allclose(refs, np.array(sys.eta_per_bath) * sys.delta)


def test_strong_coupling_fails_cleanly():
    with pytest.raises(ConvergenceError) as info:
        solve_eta(OhmicDrude(2.0, 10.0), 1.0, max_iter=5)
    assert info.value.last is not None


def test_invalid_delta_and_reference():
    with pytest.raises(DomainError):
        solve_eta(LowFrequency(1e-4, 0.1), 0.0)
    with pytest.raises(DomainError):
        renormalize(cavity_low(), cavity_reference="other")


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(1e-6, 1e-2), wl=st.floats(0.01, 1.0))
def test_fixed_point_property(alpha, wl):
    # eta solves its own map and lies in (0, 1]
    bath = LowFrequency(alpha, wl)
    eta = solve_eta(bath, 1.0)
    assert 0 < eta <= 1
    from qzeno.renorm import _eta_map_integral
    assert math.exp(-2 * _eta_map_integral(bath, eta, QuadSpec(), 1.0)) == pytest.approx(eta, abs=1e-11)


@settings(max_examples=15, deadline=None)
@given(a1=st.floats(1e-6, 1e-3), a2=st.floats(1e-6, 1e-3))
def test_eta_decreases_with_coupling(a1, a2):
    lo, hi = sorted((a1, a2))
    assert solve_eta(OhmicDrude(hi, 10.0), 1.0) <= solve_eta(OhmicDrude(lo, 10.0), 1.0) + 1e-15
