import numpy as np
import pytest

from tvvecm.mcharness import DgpSpec, simulate_path

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def dgp1_400():
    return simulate_path(DgpSpec("dgp1", 400), 2024)


def random_panel(rng, T, d=2, drift=0.0):
    """Random-walk panel with a little mean reversion in the first series."""
    e = rng.standard_normal((T, d))
    y = np.cumsum(e, axis=0) + drift
    y[:, 0] = 0.5 * y[:, 0] + 0.5 * y[:, -1] + e[:, 0]
    return y


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
