import math

import pytest

from cyclochron.constants import particle_by_name

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def electron():
    return particle_by_name("electron")


@pytest.fixture
def muon():
    return particle_by_name("muon")


@pytest.fixture
def photon():
    return particle_by_name("photon")


SQRT2 = math.sqrt(2.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
