import numpy as np
import pytest

from cft_thermal.sigfn import bump, gaussian

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def gauss():
    return gaussian(0.0, 1.0)


@pytest.fixture(scope="session")
def gauss2():
    return gaussian(0.5, 0.7, 0.8)


@pytest.fixture(scope="session")
def unit_bump_fn():
    return bump(0.0, 1.0)


@pytest.fixture(scope="session")
def bump2():
    return bump(0.3, 0.6, 1.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
