"""Pytest configuration and shared fixtures."""

import os
import sys

import numpy as np
import pytest

# Add the package directory to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from ionlab.models import GridSpec, PointConfiguration, RadialMeasure, SearchOptions
from ionlab.utils.latency_tracker import latency_tracker


@pytest.fixture(autouse=True)
def reset_latency_tracker():
    """Start every test with an empty latency history."""
    latency_tracker.reset()
    yield
    latency_tracker.reset()


@pytest.fixture
def antipodal_pair():
    """Two unit points on opposite sides of the nucleus."""
    return PointConfiguration(points=[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])


@pytest.fixture
def orthogonal_pair():
    """Two unit points at a right angle."""
    return PointConfiguration(points=[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


@pytest.fixture
def collinear_pair():
    """Two points on the same ray at radii 1 and 2."""
    return PointConfiguration(points=[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])


@pytest.fixture
def two_shell_measure():
    """Equal weights on the shells r = 1 and r = 2."""
    return RadialMeasure(radii=[1.0, 2.0], weights=[0.5, 0.5])


@pytest.fixture
def rng():
    """Seeded generator for sampled inputs."""
    return np.random.default_rng(12345)


@pytest.fixture
def fast_options():
    """Small search budget for unit tests."""
    return SearchOptions(restarts=3, max_iterations=150, seed=7, anneal=False, polish_sweeps=10)


@pytest.fixture
def coarse_grid():
    """Thomas-Fermi grid that keeps solver tests quick."""
    return GridSpec(points=600)


@pytest.fixture
def out_dir(tmp_path):
    """Output directory for reports and profiles."""
    path = tmp_path / "results"
    path.mkdir()
    return path
