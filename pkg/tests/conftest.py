"""
PyTest configuration and shared fixtures for the Kneser density toolkit tests.

Provides the small models and sets that several test modules share.
"""

import os
import sys

import pytest

# Add src directory to Python path for all tests
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

# Import after path setup
from group_core import make_group
from set_builder import periodic_set
from sigma_model import make_family
from subgroup_lattice import generate_subgroup


@pytest.fixture
def z8():
    return make_group([8])


@pytest.fixture
def z2z2():
    return make_group([2, 2])


@pytest.fixture
def product_model():
    """Z5 x Z2 x Z2 x Z2, one new factor per level."""
    return make_family("product", {"blocks": [[5], [2], [2], [2]]})


@pytest.fixture
def two_fifths_set(product_model):
    """A = {g : g_1 in {0, 1}}, the density-2/5 periodic set of the worked instance."""
    g = product_model.ambient
    h = generate_subgroup(g, [(0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)])
    return periodic_set(product_model, h, [(0, 0, 0, 0), (1, 0, 0, 0)])


@pytest.fixture
def prufer_model():
    """Z2 <= Z4 <= Z8 inside Z8."""
    return make_family("prufer", {"p": 2}, depth=3)


@pytest.fixture
def polynomial_model():
    """(Z3)^n, n = 1..5, inside (Z3)^5."""
    return make_family("polynomial", {"p": 3, "r": 1}, depth=5)


@pytest.fixture
def growing_model():
    """Growing product with c = 1 at depth 3: ambient (Z2)^6."""
    return make_family("growing-product", {"c": 1}, depth=3)


# Pytest markers for organizing tests
def pytest_configure(config):
    """Configure custom pytest markers."""
    config.addinivalue_line(
        "markers", "unit: Unit tests (fast, single module)"
    )
    config.addinivalue_line(
        "markers", "acceptance: End-to-end acceptance checks"
    )
    config.addinivalue_line(
        "markers", "slow: Slow running tests"
    )
