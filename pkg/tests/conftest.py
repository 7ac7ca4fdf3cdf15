import pytest

from qzeno.renorm import renormalize
from qzeno.spectra import CompositeSpectrum, Lorentzian, LowFrequency, OhmicDrude

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def cavity_low(omega_cav=1.01, q=1e4, g=1e-2):
    return CompositeSpectrum((Lorentzian.from_q(g, omega_cav, q), LowFrequency(1e-4, 0.1)))


def cavity_ohmic(omega_cav=1.0, q=1e4, g=1e-2):
    return CompositeSpectrum((Lorentzian.from_q(g, omega_cav, q), OhmicDrude(1e-4, 10.0)))


def cavity_only(omega_cav=1.0, q=1e4, g=1e-2):
    return CompositeSpectrum((Lorentzian.from_q(g, omega_cav, q),))


@pytest.fixture(scope="session")
def table_system():
    return renormalize(cavity_low())


@pytest.fixture(scope="session")
def cavity_system():
    return renormalize(cavity_only())
