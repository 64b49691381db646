import numpy as np
import pytest

from priiner.config import HashGridConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_hash():
    return HashGridConfig(levels=4, features_per_level=2, table_size=2**8, base_resolution=4)


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


ACCEPTANCE_LINES = []


def report(criterion, ok, detail):
    """Record one acceptance verdict; the lines are echoed at the end of the run."""
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
