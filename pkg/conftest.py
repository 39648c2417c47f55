"""Test configuration and fixtures for cumret."""

from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "tests" / "fixtures"


@pytest.fixture(autouse=True)
def fresh_logging():
    """Start every test with fresh logging state."""
    from cumret.logging_setup import reset_logging

    reset_logging()
    yield
    reset_logging()


@pytest.fixture
def rng():
    """Seeded generator; every test draws the same stream."""
    return np.random.default_rng(20240601)


@pytest.fixture
def random_walk(rng):
    """1000-bar geometric random walk with consistent OHLC."""
    from cumret.marketdata import synthetic_walk

    return synthetic_walk(rng, 1000, symbol="WALK")


@pytest.fixture
def flat_series():
    """600 bars of constant prices."""
    from cumret.marketdata import constant_series

    return constant_series(600, price=100.0)


@pytest.fixture
def hand30_path() -> Path:
    """30 bars: close 100 for bars 0-19, 90 for 20-24, 110 for 25-29."""
    return FIXTURES / "hand30.csv"


@pytest.fixture
def hand30(hand30_path):
    from cumret.marketdata import load_ohlcv

    return load_ohlcv(hand30_path)


@pytest.fixture
def isolated_config(tmp_path, monkeypatch):
    """Point config and data lookups at a temporary directory."""
    monkeypatch.setenv("CUMRET_CONFIG", str(tmp_path / "cumret.yaml"))
    monkeypatch.setenv("CUMRET_DATA_DIR", str(tmp_path / "data"))
    return tmp_path
