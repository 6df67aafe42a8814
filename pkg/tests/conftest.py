import math
import sys

import pytest

from necklace_waves.spectrum import bifurcation_for_speed

PI = math.pi


@pytest.fixture(scope="session")
def bif():
    """Bifurcation data for L1 = L2 = pi at speed 0.5."""
    return bifurcation_for_speed(0.5)


@pytest.fixture(scope="session")
def bif_hom():
    return bifurcation_for_speed(0.5, 1, 2 * PI, 0.0)


def pytest_terminal_summary(terminalreporter):
    mods = [m for name, m in sys.modules.items() if name.split(".")[-1] == "test_acceptance"]
    lines = getattr(mods[0], "RESULTS", []) if mods else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
