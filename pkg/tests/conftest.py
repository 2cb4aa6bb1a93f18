import numpy as np
import pytest

from bethe_mps import xxx, xxz

ROOT_1 = 1j * np.pi / 2
ROOT_2 = 0.3747j
ROOT_3 = -0.831 + 1j * np.pi / 2
SQRT12 = np.sqrt(12.0)


@pytest.fixture
def k2():
    return xxz(2.0)


@pytest.fixture
def kx():
    return xxx()


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_rapidities(rng, n):
    return list(rng.uniform(-1, 1, n) + 1j * rng.uniform(-1.5, 1.5, n))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
