import numpy as np
import pytest

from microkerr.molecule import REFERENCE_DEVICE, cross_kerr_chi
from microkerr.readout import HomodyneModel, KerrChannel, ProbeState


@pytest.fixture
def device():
    return REFERENCE_DEVICE


@pytest.fixture
def channel():
    """Feasibility readout: chi/2pi = 2.4 MHz, kappa2^-1 = 10 ns, kappa1^-1 = 20 us."""
    return KerrChannel.from_lab_units(abs(cross_kerr_chi(REFERENCE_DEVICE)), 10.0, 20.0)


@pytest.fixture
def probe():
    return ProbeState(40.0 + 0j)


@pytest.fixture
def ideal():
    return HomodyneModel("ideal")


@pytest.fixture
def gaussian():
    return HomodyneModel("gaussian")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria report their verdicts here; printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
