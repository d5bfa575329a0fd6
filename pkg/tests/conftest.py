import sys

import numpy as np
import pytest

from qdeform import cocycles, fqg


@pytest.fixture(scope="session")
def klein():
    return fqg.abelian(2, 2)


@pytest.fixture(scope="session")
def klein_dual(klein):
    return fqg.group_algebra(klein)


@pytest.fixture(scope="session")
def sigma(klein_dual):
    return cocycles.sigma_cocycle(klein_dual)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(mod.VERDICTS.items()):
            terminalreporter.write_line(line)
