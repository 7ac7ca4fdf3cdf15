"""Zeno and anti-Zeno decay rates of a qubit in a lossy cavity beyond the rotating-wave approximation."""

from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:
    __version__ = "0.1.0"

from .errors import ConvergenceError, DegenerateBaselineError, DomainError, QuadratureError
from .quad import QuadSpec
from .renorm import RenormalizedSystem, renormalize
from .spectra import CompositeSpectrum, Lorentzian, LowFrequency, OhmicDrude
from .zeno import DecayRates, PhaseDiagram, SystemTemplate, classify, gamma_0, gamma_tau, normalized_rate, sweep

__all__ = [
    "__version__",
    "CompositeSpectrum",
    "ConvergenceError",
    "DecayRates",
    "DegenerateBaselineError",
    "DomainError",
    "Lorentzian",
    "LowFrequency",
    "OhmicDrude",
    "PhaseDiagram",
    "QuadSpec",
    "QuadratureError",
    "RenormalizedSystem",
    "SystemTemplate",
    "classify",
    "gamma_0",
    "gamma_tau",
    "normalized_rate",
    "renormalize",
    "sweep",
]
