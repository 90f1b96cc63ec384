import numpy as np
import pytest

from bestapprox.norms import Norm

# acceptance tests append (criterion, passed, detail) here
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def l1():
    return Norm.lp(1)


@pytest.fixture
def l2():
    return Norm.lp(2)


@pytest.fixture
def sup():
    return Norm.sup()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
