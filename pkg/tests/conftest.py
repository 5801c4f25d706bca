import mpmath
import pytest

from qgv.special_functions import DEFAULT_PREC, mp_new


@pytest.fixture(scope="session")
def mp():
    return mp_new(0.75)


@pytest.fixture
def prec():
    with mpmath.workprec(DEFAULT_PREC):
        yield DEFAULT_PREC


ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].split(".")[0])):
        terminalreporter.write_line(line)
