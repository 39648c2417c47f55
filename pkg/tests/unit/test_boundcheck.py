"""Tests for the cumulative-return upper bound and the decay envelope."""

import math

import numpy as np
import pytest

from cumret.boundcheck import (
    LOG_SPACE_THRESHOLD,
    check_bound,
    decay_curve,
    di_inequality_check,
    envelope_horizon,
    iter_partitions,
    decay_envelope,
    stress_check,
    upper_bound,
)
from cumret.errors import ArgumentError
from cumret.returns import cumulative_return


class TestUpperBound:
    """Tests for upper_bound."""

    @pytest.mark.parametrize("r,n", [(0.02, 10), (-0.03, 50), (0.15, 200)])
    def test_equal_returns_reach_the_bound(self, r, n):
        """All trades alike: R equals the bound."""
        returns = [r] * n
        assert upper_bound(returns, 0.003) == pytest.approx(
            cumulative_return(returns, 0.003), rel=1e-12
        )

    def test_two_trade_example(self):
        """(0.997 * 1.025)^2 ~ 1.04433 sits above R ~ 1.03874."""
        bound = upper_bound([0.1, -0.05], 0.003)
        assert bound == pytest.approx((0.997 * 1.025) ** 2, rel=1e-12)
        assert bound == pytest.approx(1.04433, abs=5e-6)
        assert cumulative_return([0.1, -0.05], 0.003) < bound

    def test_zero_returns_zero_cost(self):
        """k = 0 and r = [0, 0, 0] give 1."""
        assert upper_bound([0.0, 0.0, 0.0], 0.0) == 1.0

    def test_empty_is_one(self):
        """The empty product limit."""
        assert upper_bound([], 0.003) == 1.0

    def test_invalid_rate(self):
        """k outside [0, 1) is rejected."""
        with pytest.raises(ArgumentError):
            upper_bound([0.1], 1.0)

    def test_overflow_reads_inf(self):
        """3^1000 is past the largest double."""
        assert upper_bound([2.0] * 1000, 0.0) == math.inf


class TestCheckBound:
    """Tests for check_bound."""

    def test_random_returns_hold(self, rng):
        """R never exceeds the bound."""
        for _ in range(200):
            n = int(rng.integers(1, 300))
            k = float(rng.uniform(0.0, 0.3))
            report = check_bound(rng.uniform(-0.8, 1.5, size=n), k)
            assert report.holds
            assert report.R <= report.bound * (1 + 1e-9)

    def test_equal_returns_have_no_slack(self):
        """Jensen equality case."""
        report = check_bound([0.01] * 100, 0.005)
        assert report.holds
        assert abs(report.slack) <= 1e-9 * report.bound

    def test_log_path_agrees_with_direct_product(self, rng):
        """Long series switch to logs without changing R or the bound."""
        returns = list(rng.uniform(-0.05, 0.05, size=LOG_SPACE_THRESHOLD + 1))
        report = check_bound(returns, 0.003)
        assert report.holds
        assert report.R == pytest.approx(cumulative_return(returns, 0.003), rel=1e-9)
        assert report.bound == pytest.approx(upper_bound(returns, 0.003), rel=1e-9)

    def test_log_path_survives_underflow(self):
        """A product far below the smallest double is still audited."""
        report = check_bound([-0.5] * 5000, 0.01)
        assert report.holds
        assert report.log_R < -3000

    def test_envelope_chain(self, rng):
        """Mean return at most k puts the bound under (1-k^2)^n <= 1."""
        returns = rng.uniform(-0.01, 0.012, size=150)
        k = 0.007
        assert returns.mean() <= k
        report = check_bound(returns, k)
        assert report.envelope is not None
        assert report.bound <= report.envelope * (1 + 1e-12)
        assert report.envelope <= 1.0

    def test_no_envelope_above_cost(self):
        """Mean return above k leaves the envelope unset."""
        assert check_bound([0.05, 0.07], 0.003).envelope is None

    def test_to_dict(self):
        """Reports serialize every field."""
        data = check_bound([0.1, -0.05], 0.003).to_dict()
        assert data["n"] == 2
        assert data["holds"] is True
        assert set(data) >= {"R", "bound", "envelope", "slack", "log_R", "log_bound"}

    @pytest.mark.parametrize("r,n", [(1.0, 1100), (2.0, 1000)])
    def test_equal_gains_past_float_range(self, r, n):
        """Products beyond the largest double are decided from the logs."""
        report = check_bound([r] * n, 0.0)
        assert report.holds
        assert report.R == math.inf
        assert report.bound == math.inf
        assert report.slack == 0.0
        assert report.log_R == pytest.approx(n * math.log1p(r), rel=1e-12)

    def test_dispersed_gains_past_float_range(self):
        """Unequal long gains keep a strictly positive log gap."""
        report = check_bound([3.0, 0.5] * 600, 0.001)
        assert report.holds
        assert report.log_R < report.log_bound
        assert report.bound == math.inf
        assert report.slack == math.inf

    def test_short_series_with_huge_product(self):
        """Few trades can still leave the float range."""
        report = check_bound([1e200, 1e200, 1e200, 1e200], 0.003)
        assert report.holds
        assert report.R == math.inf
        assert report.slack == 0.0

    @staticmethod
    def _equal_return_triples(rng, count):
        for _ in range(count):
            r = float(rng.uniform(-0.2, 1.0))
            k = float(rng.uniform(0.0, 0.2))
            n = int(rng.integers(1, 1000, endpoint=True))
            yield r, k, n

    def test_equal_returns_meet_the_bound(self, rng):
        """All-equal series give |R - bound| <= 1e-12 * bound."""
        for r, k, n in self._equal_return_triples(rng, 300):
            report = check_bound([r] * n, k)
            assert abs(report.R - report.bound) <= 1e-12 * report.bound, (r, k, n)

    @pytest.mark.slow
    def test_equal_returns_meet_the_bound_ten_thousand(self):
        """10^4 random (r, k, n) triples."""
        rng = np.random.default_rng(42)
        for r, k, n in self._equal_return_triples(rng, 10_000):
            report = check_bound([r] * n, k)
            assert abs(report.R - report.bound) <= 1e-12 * report.bound, (r, k, n)


class TestDIInequality:
    """Tests for di_inequality_check."""

    def test_equal_returns(self):
        """Jensen equality."""
        lhs, rhs, holds = di_inequality_check([0.03] * 20)
        assert holds
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_strict_for_distinct_returns(self):
        """r = [0.1, -0.05] gives lhs < rhs."""
        lhs, rhs, holds = di_inequality_check([0.1, -0.05])
        assert holds
        assert lhs < rhs

    def test_single_return(self):
        """A one-point average."""
        result = di_inequality_check([0.07])
        assert result.lhs == result.rhs
        assert result.holds

    def test_relation_to_products(self, rng):
        """exp(-rhs)(1-k)^n = R and exp(-lhs)(1-k)^n = bound."""
        returns = list(rng.uniform(-0.3, 0.4, size=80))
        k = 0.003
        lhs, rhs, _ = di_inequality_check(returns)
        cost = (1 - k) ** len(returns)
        assert math.exp(-rhs) * cost == pytest.approx(cumulative_return(returns, k), rel=1e-9)
        assert math.exp(-lhs) * cost == pytest.approx(upper_bound(returns, k), rel=1e-9)

    def test_empty_rejected(self):
        """At least one return is needed."""
        with pytest.raises(ArgumentError):
            di_inequality_check([])

    @staticmethod
    def _assert_equality_iff_equal(rng, count):
        for _ in range(count):
            n = int(rng.integers(2, 50, endpoint=True))
            r = float(rng.uniform(-0.5, 1.0))
            equal = di_inequality_check([r] * n)
            assert equal.holds
            assert abs(equal.lhs - equal.rhs) <= 1e-12 * max(1.0, abs(equal.rhs))

            returns = rng.uniform(-0.5, 0.4, size=n)
            returns[-1] = returns[0] + 0.5
            distinct = di_inequality_check(returns)
            assert distinct.holds
            assert distinct.rhs - distinct.lhs > 1e-12 * max(1.0, abs(distinct.rhs))

    def test_equality_only_for_equal_returns(self, rng):
        """lhs = rhs for equal returns, strictly below for distinct ones."""
        self._assert_equality_iff_equal(rng, 500)

    @pytest.mark.slow
    def test_hundred_thousand_series(self):
        """The inequality holds on 10^5 random series."""
        rng = np.random.default_rng(42)
        for _ in range(100_000):
            n = int(rng.integers(1, 50, endpoint=True))
            assert di_inequality_check(rng.uniform(-0.9, 2.0, size=n)).holds
        self._assert_equality_iff_equal(rng, 10_000)


class TestEnvelope:
    """Tests for decay_envelope and envelope_horizon."""

    def test_values(self):
        """k = 0.1 gives 0.99, 0.9801 and 1 at n = 0."""
        assert decay_envelope(0.1, 1) == pytest.approx(0.99, rel=1e-12)
        assert decay_envelope(0.1, 2) == pytest.approx(0.9801, rel=1e-12)
        assert decay_envelope(0.1, 0) == 1.0

    @pytest.mark.parametrize("k", [0.0, 1.0, -0.1])
    def test_rate_outside_open_interval(self, k):
        """k must lie in (0, 1)."""
        with pytest.raises(ArgumentError):
            decay_envelope(k, 3)

    def test_negative_count(self):
        """n must be non-negative."""
        with pytest.raises(ArgumentError):
            decay_envelope(0.1, -1)

    def test_strictly_decreasing(self):
        """Each trade shrinks the envelope."""
        values = [decay_envelope(0.003, n) for n in range(0, 500)]
        assert all(a > b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("k", [0.001, 0.003, 0.007, 0.1, 0.5])
    def test_horizon_is_first_crossing(self, k):
        """envelope_horizon is the first n below 1e-6."""
        horizon = envelope_horizon(k)
        assert decay_envelope(k, horizon) < 1e-6
        assert decay_envelope(k, horizon - 1) >= 1e-6


class TestDecayCurve:
    """Tests for decay_curve."""

    def test_mean_equal_to_cost(self):
        """r_mean = k makes the bound the envelope itself."""
        k = 0.003
        points = decay_curve(k, k, 300)
        for point in points:
            expected = decay_envelope(k, point.n)
            assert point.bound == pytest.approx(expected, rel=1e-9)
            assert point.envelope == pytest.approx(expected, rel=1e-12)

    def test_random_strategy_pairing(self):
        """k = 0.007, r_mean = 0.0048: decreasing envelope with R under it."""
        points = decay_curve(0.007, 0.0048, 2000)
        envelopes = [p.envelope for p in points]
        assert all(a > b for a, b in zip(envelopes, envelopes[1:]))
        last = points[-1]
        assert last.n == 2000
        assert last.envelope == pytest.approx((1 - 0.000049) ** 2000, rel=1e-9)
        assert last.envelope < 1.0
        assert last.R <= last.envelope

    def test_noisy_curve_respects_bound(self):
        """Dispersed returns keep R under the bound at every n."""
        points = decay_curve(0.007, 0.0048, 1000, np.random.default_rng(3))
        for point in points:
            assert point.R <= point.bound * (1 + 1e-9)
            if not math.isnan(point.envelope):
                assert point.bound <= point.envelope * (1 + 1e-9)

    def test_envelope_missing_above_cost(self):
        """A target above k has no envelope."""
        points = decay_curve(0.003, 0.01, 10)
        assert all(math.isnan(p.envelope) for p in points)

    def test_invalid_horizon(self):
        """n_max must be positive."""
        with pytest.raises(ArgumentError):
            decay_curve(0.003, 0.001, 0)


class TestStressCheck:
    """Tests for stress_check."""

    def test_partitions_cover_cases(self):
        """Partition sizes sum to the case count."""
        sizes = [size for _, size in iter_partitions(1003, 8)]
        assert sum(sizes) == 1003
        assert max(sizes) - min(sizes) <= 1

    def test_small_run_has_no_violations(self):
        """A few thousand random cases all hold."""
        result = stress_check(2000, seed=1, n_max=200)
        assert result.ok
        assert result.cases == 2000
        assert result.max_log_excess <= 1e-9

    def test_long_series_past_float_range(self):
        """Series up to 5000 trades overflow the raw products; the audit still passes."""
        result = stress_check(40, seed=3, n_max=5000, partitions=2)
        assert result.ok
        assert result.cases == 40

    def test_worker_count_does_not_change_outcome(self):
        """Per-partition seeding makes results worker-independent."""
        serial = stress_check(400, seed=9, n_max=100, partitions=4, workers=1)
        parallel = stress_check(400, seed=9, n_max=100, partitions=4, workers=2)
        assert serial == parallel

    def test_invalid_arguments(self):
        """Case, partition and worker counts must be positive."""
        with pytest.raises(ArgumentError):
            stress_check(0)
        with pytest.raises(ArgumentError):
            stress_check(10, workers=0)

    @pytest.mark.slow
    def test_million_cases(self):
        """10^6 random (returns, k) pairs, zero violations."""
        result = stress_check(1_000_000, seed=42, n_max=50, partitions=8)
        assert result.ok
