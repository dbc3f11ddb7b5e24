"""Shared pytest configuration."""

import sys
from pathlib import Path

import pytest

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte-Carlo acceptance checks")


@pytest.fixture
def rng():
    """Seeded generator for randomized property checks."""
    import numpy as np
    return np.random.default_rng(20240611)
