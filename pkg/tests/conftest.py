import numpy as np
import pytest

from ctdegrad.phantom import make_phantom


@pytest.fixture(scope="session")
def phantom96():
    return make_phantom(96, 1234)


@pytest.fixture(scope="session")
def phantom128():
    return make_phantom(128, 42)


@pytest.fixture()
def rng():
    return np.random.default_rng(99)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print the acceptance scoreboard collected by test_acceptance.py."""

    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
