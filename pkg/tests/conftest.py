import numpy as np
import pytest

from dualpih.harness.scenario import default_scenario

ACCEPTANCE_LINES = []


def record_acceptance(number: int, passed: bool, detail: str) -> str:
    line = f"ACCEPTANCE criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()
