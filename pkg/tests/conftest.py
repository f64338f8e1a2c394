import numpy as np
import pytest

from hierzip.codec import compress
from hierzip.synthetic import gaussians

_ACCEPTANCE = []


def record_criterion(number, name, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name}"
    if detail:
        line += f" -- {detail}"
    _ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def smooth64():
    return gaussians((64, 64, 64), seed=3)


@pytest.fixture(scope="session")
def smooth_archive(smooth64):
    return compress(smooth64, 1e-3, levels=3, quality="cubic")


@pytest.fixture(scope="session")
def odd_field():
    rng = np.random.default_rng(7)
    base = gaussians((33, 30, 37), seed=1).astype(np.float64)
    return base + 0.01 * rng.standard_normal(base.shape)
