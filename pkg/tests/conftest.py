import numpy as np
import pytest

from rotns.grid import GridSpec

# (criterion number, title, passed, detail), filled by tests/test_acceptance.py
ACCEPTANCE_LINES: list = []


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, passed: bool, detail: str):
        ACCEPTANCE_LINES.append((number, title, bool(passed), detail))
        print(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")


@pytest.fixture
def grid16():
    return GridSpec(16, 2 * np.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)
