import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from congcount.arithmetic import GaussianInteger  # noqa: E402
from congcount.semigroup import cf_spec, example_schottky  # noqa: E402


@pytest.fixture(scope="session")
def cf12():
    return cf_spec([1, 2])


@pytest.fixture(scope="session")
def schottky():
    return example_schottky()


@pytest.fixture(scope="session")
def gauss_spec():
    return cf_spec([1, 2, GaussianInteger(1, 1)])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
