import numpy as np
import pytest

from ifreq.harness import standard_filters
from ifreq.weights import solve_erlang_p

LPF_KINDS = ("LPF_REC", "LPF_KAY", "LPF_CIC", "LPF_ERL", "LPF_LSQ", "LPF_BUT")


@pytest.fixture(scope="session")
def filters():
    return standard_filters()


@pytest.fixture(scope="session")
def erlang_p():
    return solve_erlang_p(2, 1 / 25)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    lines = test_acceptance.pytest_terminal_summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
