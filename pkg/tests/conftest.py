"""Shared fixtures for the thinningpy tests."""
import numpy as np
import pytest

from thinningpy.initial_data import Exponential, Uniform01


@pytest.fixture
def uniform():
    return Uniform01()


@pytest.fixture
def exponential():
    return Exponential(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20201017)
