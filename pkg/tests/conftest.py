import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def normal_stream(seed, n=200, scale=1.0, loc=0.0):
    r = np.random.default_rng(seed)
    mu = loc + r.normal(size=n)
    y = mu + scale * r.normal(size=n)
    return y, mu
