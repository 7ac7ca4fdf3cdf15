import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qzeno import _backend, _jit
from qzeno.quad import QuadSpec
from qzeno.renorm import renormalize
from qzeno.zeno import normalized_rate

from .conftest import cavity_low, cavity_ohmic

pytestmark = pytest.mark.skipif(not _jit.NUMBA_AVAILABLE, reason="numba not installed")

SPEC = QuadSpec()


@pytest.fixture(scope="module", params=["low", "ohmic"])
def packed(request):
    sys = renormalize(cavity_low() if request.param == "low" else cavity_ohmic())
    return sys.packed, sys.eta_delta


def both(fn):
    out = {}
    for b in ("numba", "numpy"):
        with _jit.use_backend(b):
            out[b] = fn()
    return out["numba"], out["numpy"]


def test_backend_switch_restores():
    before = _jit.backend()
    with _jit.use_backend("numpy"):
        assert _jit.backend() == "numpy"
    assert _jit.backend() == before
    with pytest.raises(ValueError):
        _jit.set_backend("fortran")


@settings(max_examples=30, deadline=None)
@given(w=st.lists(st.floats(-1.0, 50.0), min_size=1, max_size=30))
def test_density_values(w):
    p = renormalize(cavity_low()).packed
    a, b = both(lambda: _backend.rho_values(p, p.mask(), np.array(w)))
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)


def test_density_integral(packed):
    p, _ = packed
    (a, _), (b, _) = both(lambda: _backend.rho_integral(p, p.mask(), SPEC))
    assert a == pytest.approx(b, rel=1e-9)


def test_renormalization_integral(packed):
    p, ed = packed
    (a, _), (b, _) = both(lambda: _backend.eta_integral(p, p.mask(), ed, SPEC))
    assert a == pytest.approx(b, rel=1e-9)


@pytest.mark.parametrize("tau", [0.01, 1.0, 5.0, 40.0, 1e3])
def test_rate_integral(packed, tau):
    p, ed = packed
    (a, _), (b, _) = both(lambda: _backend.rate_integral(p, p.mask(), ed, tau, SPEC))
    assert a == pytest.approx(b, rel=1e-8)


def test_level_shift(packed):
    p, ed = packed
    e = ed + np.array([-0.3, -0.01, -1e-4, 2e-5, 0.01, 0.5])
    a, b = both(lambda: _backend.level_shift(p, p.mask(), e, SPEC))
    np.testing.assert_allclose(a, b, rtol=1e-7, atol=1e-13)


def test_arrowhead_spectrum():
    rng = np.random.default_rng(7)
    d = np.sort(rng.uniform(-1, 1, 300))
    v2 = rng.uniform(1e-8, 1e-4, 300)
    a, b = both(lambda: _backend.arrowhead_decompose(d, v2))
    np.testing.assert_allclose(a.energies, b.energies, atol=1e-12)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-10)
    assert a.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_normalized_rate_backends_agree():
    sys = renormalize(cavity_ohmic(1.01))
    a, b = both(lambda: normalized_rate(sys, 3.0).ratio)
    assert a == pytest.approx(b, rel=1e-8)
