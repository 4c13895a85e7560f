import numpy as np
import pytest

from hypwps.boundary import vonmises_bump
from hypwps.pairings import PhaseSpaceTest


@pytest.fixture(scope="session")
def plane_problem():
    """Boundary data and phase-space test shared by the pairing tests."""
    T = vonmises_bump(0.0, 2.0)
    Tp = vonmises_bump(np.pi, 2.0)
    u = PhaseSpaceTest.build(0j, 1.2, 0.0, 0.8)
    return T, Tp, u


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the acceptance summary and print it."""
    def record(number, name, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
