"""Shared fixtures and the acceptance summary printed at the end of a run."""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from torus_vortex.green import GreenEvaluator  # noqa: E402
from torus_vortex.renorm import VortexConfig  # noqa: E402

# filled by test_acceptance.py, one (number, passed, text) per criterion
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def evaluator():
    return GreenEvaluator()


@pytest.fixture(scope="session")
def dipole():
    """The symmetric +1/-1 pair at (0.3, 0.5) and (0.7, 0.5)."""
    return VortexConfig.dipole()


@pytest.fixture(scope="session")
def dipole_q():
    return 2.0 * math.pi * np.array([-0.4, 0.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
