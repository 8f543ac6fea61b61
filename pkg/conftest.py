"""Shared pytest fixtures for the bvkit test suite."""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from bvkit.config.settings import RandomConfig
from bvkit.models.piecewise import PiecewiseLinear


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale case (deselect with -m 'not slow')")


@pytest.fixture
def seed() -> int:
    """Seed from BVKIT_SEED, so a failing randomised run can be replayed."""
    return int(os.getenv("BVKIT_SEED", RandomConfig.seed))


@pytest.fixture
def rng(seed):
    return np.random.default_rng(seed)


def random_piecewise(rng, max_breakpoints: int = 50, a: float = 0.0, b: float = 1.0) -> PiecewiseLinear:
    """Random piecewise-linear function on [a, b] with values in [-1, 1]."""
    n = int(rng.integers(2, max_breakpoints + 1))
    inner = np.sort(rng.uniform(a, b, n - 2))
    xs = np.unique(np.concatenate([[a], inner, [b]]))
    return PiecewiseLinear(xs, rng.uniform(-1.0, 1.0, xs.size))


@pytest.fixture
def random_functions(rng):
    """Factory for lists of random piecewise-linear functions."""
    def make(count: int, max_breakpoints: int = 50):
        return [random_piecewise(rng, max_breakpoints) for _ in range(count)]
    return make


@pytest.fixture
def tent() -> PiecewiseLinear:
    """0 -> 1 -> 0 on [0, 2]."""
    return PiecewiseLinear.from_points([(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)])
