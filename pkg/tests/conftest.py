import numpy as np
import pytest

from cfwave.potential import preset
from cfwave.profile import solve_profile


@pytest.fixture(scope="session")
def quartic():
    return preset("quartic")


@pytest.fixture(scope="session")
def sextic():
    return preset("sextic_m1_2")


@pytest.fixture(scope="session")
def quartic_profile(quartic):
    return solve_profile(quartic, 10.0, 1e-3)


@pytest.fixture(scope="session")
def sextic_profile(sextic):
    return solve_profile(sextic, (6.0, 2000.0), 0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
