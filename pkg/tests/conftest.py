import pytest

from chorc.syntax import parse
from oracles import RUNNING


@pytest.fixture
def running():
    return parse(RUNNING)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
