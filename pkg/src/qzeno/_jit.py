"""Numba toggle.

Hot kernels are compiled with numba unless ``QZENO_NUMBA=0`` is set in the
environment (or numba is missing), in which case every caller falls back to
the vectorized numpy path. ``use_backend`` switches at runtime, which the
benchmark and the equivalence tests rely on.
"""

import contextlib
import functools
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
_env = os.environ.get("QZENO_NUMBA", "1").strip().lower()
_state = {"backend": "numba" if NUMBA_AVAILABLE and _env not in ("0", "false", "no", "off") else "numpy"}


def backend():
    return _state["backend"]


def set_backend(name):
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba is not installed")
    _state["backend"] = name


@contextlib.contextmanager
def use_backend(name):
    old = backend()
    set_backend(name)
    try:
        yield
    finally:
        _state["backend"] = old


def _identity(fn=None, **kwargs):
    if fn is None:
        return lambda f: f
    return fn


if NUMBA_AVAILABLE:
    njit = functools.partial(numba.njit, cache=True, nogil=True)
else:  # pragma: no cover
    njit = _identity
