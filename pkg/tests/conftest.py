import numpy as np
import pytest

from tosecap.config import ScenarioConfig

_ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_config():
    return ScenarioConfig(J=200, beta=0.5, M=4, trials=3, seed=7)


@pytest.fixture
def acceptance_report():
    """Collects one pass/fail line per acceptance criterion."""

    def record(criterion, passed, detail):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
