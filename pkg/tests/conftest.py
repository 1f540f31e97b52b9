import numpy as np
import pytest

from quenchmap import PhysicalParams, TrapSpec, load_fixture, make_grid

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def params():
    return PhysicalParams()


@pytest.fixture(scope="session")
def trap5():
    return TrapSpec(5.0)


@pytest.fixture(scope="session")
def trap1():
    return TrapSpec(1.0)


@pytest.fixture(scope="session")
def grid2048():
    return make_grid(-20.0, 20.0, 2048)


@pytest.fixture(scope="session")
def wide_grid():
    return make_grid(-60.0, 60.0, 8192)


@pytest.fixture(scope="session")
def fig1():
    return load_fixture("fig1")


@pytest.fixture(scope="session")
def fig2():
    return load_fixture("fig2")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
