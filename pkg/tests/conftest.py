"""Shared fixtures for the test suite."""
import os
import sys

import numpy as np
import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from src.core import config
from src.wave.field_sampler import WaveCoefficients, draw_sample


@pytest.fixture(autouse=True)
def no_log_file(monkeypatch):
    """Keep test runs from writing the log file."""
    monkeypatch.setattr(config, "LOG_FILE", "")


@pytest.fixture
def single_mode():
    """The field X_0 J_0(r): every other coefficient is zero."""
    return WaveCoefficients(1.0, np.zeros(8), np.zeros(8), 8)


@pytest.fixture
def first_harmonic():
    """The field -sqrt(2) J_1(r) cos(theta)."""
    xs = np.zeros(8)
    xs[0] = 1.0
    return WaveCoefficients(0.0, xs, np.zeros(8), 8)


@pytest.fixture
def random_coeffs():
    return draw_sample(7, 3, 24)
