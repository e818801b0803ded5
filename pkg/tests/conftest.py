import random

import pytest

from chap.instance import generate_instance
from helpers import ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'SKIP' if passed is None else 'PASS' if passed else 'FAIL'}  {criterion}  {detail}")


@pytest.fixture(scope="module")
def small_instance():
    return generate_instance(8, 30, 3, 0.8, 11, feasible_range=(3, 8))


@pytest.fixture
def rng():
    return random.Random(1234)
