import numpy as np
import pytest

from hysure.core import HsiCube


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_cube(rng, h=8, w=8, p=6, scale=1.0):
    return HsiCube(h, w, scale * rng.standard_normal((h * w, p)))


@pytest.fixture
def cube(rng):
    return random_cube(rng)


ACCEPTANCE_LINES = []


def report(criterion, ok, detail):
    """Record one acceptance verdict; all of them are echoed in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def note(criterion, detail):
    """Informational context for a verdict; never gates."""
    line = f"[INFO] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
