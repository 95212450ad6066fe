"""
Configuration and shared fixtures for integration tests.
"""

import pytest

from src.python.config import Settings
from src.python.constants import ConstantTriple
from src.python.moments import DistributionSpec


@pytest.fixture(scope="module")
def settings():
    """Default tunables with small simulation blocks."""
    return Settings(simulation_block_cells=1 << 20)


@pytest.fixture(scope="module")
def rademacher():
    """Symmetric two-point law, the worst case for the third-moment term."""
    return DistributionSpec.two_point(1.0)


@pytest.fixture(scope="module")
def tau2():
    return ConstantTriple.published("t2")
