import numpy as np
import pytest

from relusat.sphere_points import generate_antipodal_quasiuniform


@pytest.fixture(scope="session")
def pts64():
    return generate_antipodal_quasiuniform(2, 64, 7)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
