"""Tests for the cost-rate and trade-count sweeps."""

import math

import pytest

from cumret.bootstrap import run_bootstrap
from cumret.boundcheck import check_bound
from cumret.config import BootstrapConfig
from cumret.errors import ArgumentError
from cumret.sweeps import k_grid_values, running_curves, sweep_k, sweep_n


class TestKGrid:
    """Tests for k_grid_values."""

    def test_default_grid(self):
        """0.001..0.01 by 0.001 has ten values, both ends included."""
        grid = k_grid_values(0.001, 0.01, 0.001)
        assert len(grid) == 10
        assert grid[0] == 0.001
        assert grid[-1] == 0.01
        assert grid[2] == 0.003

    def test_single_value(self):
        """lo = hi gives one value regardless of step."""
        assert k_grid_values(0.003, 0.003, 0.0) == [0.003]

    @pytest.mark.parametrize("lo,hi,step", [(0.01, 0.001, 0.001), (-0.1, 0.1, 0.01), (0.0, 1.0, 0.1), (0.0, 0.1, 0.0)])
    def test_invalid(self, lo, hi, step):
        """Bounds must be ordered inside [0, 1) with a positive step."""
        with pytest.raises(ArgumentError):
            k_grid_values(lo, hi, step)


class TestSweepK:
    """Tests for sweep_k."""

    def test_rows_and_cost_algebra(self, random_walk):
        """Same windows for every k: mean_R scales per replica by ((1-k2)/(1-k1))^n."""
        config = BootstrapConfig(M=20, min_window=260, seed=5)
        rows = sweep_k(["MA"], random_walk, (0.001, 0.01, 0.009), config)

        assert [(row["rule"], row["k"]) for row in rows] == [("MA", 0.001), ("MA", 0.01)]
        assert rows[0]["mean_n"] == rows[1]["mean_n"]

        low = run_bootstrap(config.model_copy(update={"k": 0.001}), random_walk, "MA")
        expected = math.fsum(r.R * (0.99 / 0.999) ** r.n for r in low.replicas) / len(low.replicas)
        assert rows[0]["mean_R"] == low.mean_R
        assert rows[1]["mean_R"] == pytest.approx(expected, rel=1e-12)

    def test_mean_R_decreases_in_k(self, random_walk):
        """Higher costs never raise mean R when trades happen."""
        config = BootstrapConfig(M=15, min_window=260, seed=2)
        rows = sweep_k(["RND"], random_walk, (0.001, 0.005, 0.002), config)
        values = [row["mean_R"] for row in rows]
        assert values == sorted(values, reverse=True)
        assert len(set(values)) == len(values)


class TestRunningCurves:
    """Tests for running_curves and sweep_n."""

    def test_rows_per_k_and_n(self):
        """One row per (k, n)."""
        report = running_curves([0.1, -0.05, 0.02], [0.0, 0.003])
        assert report.ok
        assert [(row["k"], row["n"]) for row in report.rows] == [
            (0.0, 1), (0.0, 2), (0.0, 3), (0.003, 1), (0.003, 2), (0.003, 3),
        ]

    def test_values(self):
        """R and the bound after two trades."""
        report = running_curves([0.1, -0.05], [0.003])
        second = report.rows[1]
        assert second["R"] == pytest.approx((0.997 * 1.1) * (0.997 * 0.95), rel=1e-12)
        assert second["bound"] == pytest.approx((0.997 * 1.025) ** 2, rel=1e-12)
        assert report.rows[0]["R"] == pytest.approx(report.rows[0]["bound"], rel=1e-12)

    def test_empty_returns(self):
        """No trades, no rows."""
        report = running_curves([], [0.003])
        assert report.rows == []
        assert report.ok

    def test_invalid_rate(self):
        """k must lie in [0, 1)."""
        with pytest.raises(ArgumentError):
            running_curves([0.1], [1.0])

    def test_rows_match_check_bound(self, rng):
        """Each row is the audit of its prefix."""
        returns = list(rng.uniform(-0.2, 0.3, size=25))
        report = running_curves(returns, [0.005])
        for row in report.rows:
            audit = check_bound(returns[: row["n"]], 0.005)
            assert row["R"] == audit.R
            assert row["bound"] == audit.bound

    def test_gains_past_float_range(self):
        """Strong gains overflow to inf rows without violations."""
        report = running_curves([2.0] * 700, [0.0])
        assert report.ok
        assert report.rows[0]["R"] == pytest.approx(3.0, rel=1e-12)
        assert report.rows[-1]["R"] == math.inf
        assert report.rows[-1]["bound"] == math.inf

    def test_sweep_n_random_strategy(self, random_walk):
        """RND along the full series: rows for each k, bound never exceeded."""
        report = sweep_n("RND", random_walk, [0.001, 0.007], 20, seed=42)
        assert report.ok
        assert len(report.rows) == 40
        assert all(row["R"] <= row["bound"] * (1 + 1e-9) for row in report.rows)

    def test_sweep_n_deterministic(self, random_walk):
        """Same seed, same curve."""
        first = sweep_n("RND", random_walk, [0.003], 15, seed=8)
        second = sweep_n("RND", random_walk, [0.003], 15, seed=8)
        assert first.rows == second.rows

    def test_sweep_n_short_history(self, hand30):
        """Fewer trades than n_max truncate the curve."""
        report = sweep_n("SMA", hand30, [0.003], 10)
        assert len(report.rows) == 1

    def test_sweep_n_invalid(self, random_walk):
        """n_max must be positive."""
        with pytest.raises(ArgumentError):
            sweep_n("RND", random_walk, [0.003], 0)
