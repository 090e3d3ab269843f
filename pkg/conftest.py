"""Shared fixtures for the test suites."""

import os

import numpy as np
import pytest

from models import SeriesData
from parametrization import analyze

ROOT = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(ROOT, "fixtures")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def identity_levels():
    """Canonical parametrization Θ^(l) = I analyzed for l = 1..12 (entry l-1 is level l)."""
    return tuple(analyze(np.eye(l + 1), level=l, family="I") for l in range(1, 13))


@pytest.fixture
def small_series(rng):
    """Trend plus noise, n = 8."""
    i = np.arange(9)
    return SeriesData(values=1.0 + 0.3 * i + rng.normal(0.0, 0.5, size=9), start_year=2000)


@pytest.fixture
def fixture_csv():
    return os.path.join(FIXTURES, "synthetic_trend_n60.csv")


@pytest.fixture
def write_csv(tmp_path):
    """Write CSV text to a temp file and return its path."""
    def _write(text: str, name: str = "series.csv") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write
