"""
Pytest configuration and fixtures
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.matpoly.polynomial import QuadMatrixPolynomial  # noqa: E402
from src.problems.suite import ProblemInstance, example1, example3  # noqa: E402


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so every test sees the same numbers."""
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def example1_instance() -> ProblemInstance:
    return example1()


@pytest.fixture(scope="session")
def example3_small() -> ProblemInstance:
    """Example 3, m=16, two unit-circle eigenvalues in G."""
    return example3(16, 1, seed=0)


@pytest.fixture
def scalar_null_recurrent() -> QuadMatrixPolynomial:
    """1x1 QBD with E0 = E2 = 1/2: a double eigenvalue at z = 1."""
    return QuadMatrixPolynomial.from_qbd(
        np.array([[0.5]]), np.array([[0.0]]), np.array([[0.5]])
    )
