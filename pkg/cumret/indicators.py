"""Technical indicator kernels.

Every rolling statistic is evaluated over an explicit window view, so each
defined value equals a direct recomputation over its window. Values inside the
warm-up region are NaN and must be read through IndicatorSeries.at().
"""

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ArgumentError, UndefinedValueError
from .marketdata import PriceSeries

AlphaMode = Literal["slow", "conventional"]
DmiConvention = Literal["wilder", "low_rise"]

CCI_SCALE = 0.015


@dataclass(frozen=True)
class IndicatorParams:
    """Lookbacks of one rule (default lookbacks)."""

    n: int
    m: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentError(f"n must be >= 1, got {self.n}")
        if self.m is not None and self.m < 1:
            raise ArgumentError(f"m must be >= 1, got {self.m}")


@dataclass(frozen=True, eq=False)
class IndicatorSeries:
    """Indicator values aligned one-to-one with the source bars."""

    name: str
    values: np.ndarray
    valid_from: int
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.flags.writeable:
            values = values.copy()
            values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def defined(self) -> np.ndarray:
        """Boolean mask of indices holding a usable value."""
        mask = ~np.isnan(self.values)
        mask[: self.valid_from] = False
        return mask

    def is_defined(self, t: int) -> bool:
        return 0 <= t < len(self.values) and t >= self.valid_from and not np.isnan(self.values[t])

    def at(self, t: int) -> float:
        """Value at index t; raises inside the warm-up region."""
        if not self.is_defined(t):
            raise UndefinedValueError(
                f"{self.name} is undefined at index {t} (valid_from={self.valid_from})"
            )
        return float(self.values[t])


def _as_array(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64)


def _undefined(length: int) -> np.ndarray:
    return np.full(length, np.nan)


def _check_lookback(name: str, n: int) -> None:
    if n < 1:
        raise ArgumentError(f"{name} must be >= 1, got {n}")


def _rolling(values: np.ndarray, n: int) -> np.ndarray:
    """Windows ending at t = n-1 .. len-1, one row each."""
    return sliding_window_view(values, n)


def _alpha(n: int, alpha_mode: AlphaMode) -> float:
    if alpha_mode == "slow":
        return 1.0 / (n + 1)
    if alpha_mode == "conventional":
        return 2.0 / (n + 1)
    raise ArgumentError(f"unknown alpha_mode {alpha_mode!r}")


def sma(values, n: int) -> IndicatorSeries:
    """Simple moving average of the last n values; valid_from = n-1."""
    _check_lookback("n", n)
    values = _as_array(values)
    out = _undefined(len(values))
    if len(values) >= n:
        out[n - 1 :] = _rolling(values, n).mean(axis=1)
    return IndicatorSeries(name=f"SMA{n}", values=out, valid_from=n - 1, params={"n": n})


def ema(values, n: int, alpha_mode: AlphaMode = "slow") -> IndicatorSeries:
    """Exponential moving average seeded with the first value.

    EMA_t = EMA_{t-1} + alpha * (C_t - EMA_{t-1}); alpha is 1/(n+1) in
    slow mode and 2/(n+1) in conventional mode.
    """
    _check_lookback("n", n)
    values = _as_array(values)
    if len(values) == 0:
        raise ArgumentError("ema requires a non-empty series")

    alpha = _alpha(n, alpha_mode)
    out = np.empty(len(values))
    level = float(values[0])
    out[0] = level
    for t in range(1, len(values)):
        level = level + alpha * (float(values[t]) - level)
        out[t] = level
    return IndicatorSeries(
        name=f"EMA{n}", values=out, valid_from=0, params={"n": n, "alpha": alpha}
    )


def momentum_family(values, n: int, kind: Literal["MOM", "ROC"]) -> IndicatorSeries:
    """MOM = 100*C_t/C_{t-n}; ROC = 100*(C_t/C_{t-n} - 1); valid_from = n."""
    _check_lookback("n", n)
    if kind not in ("MOM", "ROC"):
        raise ArgumentError(f"unknown momentum kind {kind!r}")
    values = _as_array(values)
    out = _undefined(len(values))
    if len(values) > n:
        current = values[n:]
        past = values[:-n]
        positive = past > 0
        ratio = np.full(len(past), np.nan)
        np.divide(current, past, out=ratio, where=positive)
        out[n:] = 100.0 * ratio if kind == "MOM" else 100.0 * (ratio - 1.0)
    return IndicatorSeries(name=f"{kind}{n}", values=out, valid_from=n, params={"n": n})


def stochastic_kd(series: PriceSeries, n: int = 12, m: int = 12) -> tuple[IndicatorSeries, IndicatorSeries]:
    """Stochastic %K over n bars and its m-bar mean %D.

    A flat window (highest high equals lowest low) yields K = 50.
    """
    _check_lookback("n", n)
    _check_lookback("m", m)
    close, high, low = series.close, series.high, series.low
    k_values = _undefined(len(close))
    if len(close) >= n:
        highest = _rolling(high, n).max(axis=1)
        lowest = _rolling(low, n).min(axis=1)
        span = highest - lowest
        flat = span == 0
        k_tail = np.full(len(span), 50.0)
        np.divide(close[n - 1 :] - lowest, span, out=k_tail, where=~flat)
        k_tail[~flat] *= 100.0
        k_values[n - 1 :] = k_tail

    d_values = _undefined(len(close))
    d_start = n + m - 2
    if len(close) > d_start:
        d_values[d_start:] = _rolling(k_values[n - 1 :], m).mean(axis=1)

    params = {"n": n, "m": m}
    return (
        IndicatorSeries(name="K", values=k_values, valid_from=n - 1, params=params),
        IndicatorSeries(name="D", values=d_values, valid_from=d_start, params=params),
    )


def macd_line(
    values, n_fast: int = 12, m_slow: int = 26, alpha_mode: AlphaMode = "slow"
) -> IndicatorSeries:
    """EMA(n_fast) - EMA(m_slow), pointwise; valid_from = 0."""
    if n_fast >= m_slow:
        raise ArgumentError(f"MACD requires n_fast < m_slow, got {n_fast} >= {m_slow}")
    fast = ema(values, n_fast, alpha_mode)
    slow = ema(values, m_slow, alpha_mode)
    return IndicatorSeries(
        name="MACD",
        values=fast.values - slow.values,
        valid_from=0,
        params={"n": n_fast, "m": m_slow},
    )


def _changes(values: np.ndarray) -> np.ndarray:
    return np.diff(values)


def rsi(values, n: int = 14) -> IndicatorSeries:
    """Relative strength index over the last n close-to-close changes.

    All-up windows give 100; windows without any change give 50.
    """
    _check_lookback("n", n)
    values = _as_array(values)
    out = _undefined(len(values))
    if len(values) > n:
        changes = _changes(values)
        up_sum = _rolling(np.maximum(changes, 0.0), n).sum(axis=1)
        down_sum = _rolling(np.maximum(-changes, 0.0), n).sum(axis=1)
        tail = np.full(len(up_sum), 50.0)
        has_down = down_sum > 0
        rs = np.zeros(len(up_sum))
        np.divide(up_sum, down_sum, out=rs, where=has_down)
        tail[has_down] = 100.0 - 100.0 / (1.0 + rs[has_down])
        tail[~has_down & (up_sum > 0)] = 100.0
        out[n:] = tail
    return IndicatorSeries(name=f"RSI{n}", values=out, valid_from=n, params={"n": n})


def psy(values, n: int = 10) -> IndicatorSeries:
    """Fraction of the last n changes with C_t > C_{t-1}; ties are not up."""
    _check_lookback("n", n)
    values = _as_array(values)
    out = _undefined(len(values))
    if len(values) > n:
        ups = (_changes(values) > 0).astype(np.float64)
        out[n:] = _rolling(ups, n).sum(axis=1) / n
    return IndicatorSeries(name=f"PSY{n}", values=out, valid_from=n, params={"n": n})


def cci(series: PriceSeries, n: int = 9) -> IndicatorSeries:
    """Commodity channel index on typical price M = (H+L+C)/3.

    d(n) is the mean absolute deviation of M over the window; a window
    without deviation yields 0.
    """
    _check_lookback("n", n)
    typical = (series.high + series.low + series.close) / 3.0
    out = _undefined(len(typical))
    if len(typical) >= n:
        windows = _rolling(typical, n)
        mean = windows.mean(axis=1)
        deviation = np.abs(windows - mean[:, None]).mean(axis=1)
        flat = (np.ptp(windows, axis=1) == 0) | (deviation == 0)
        tail = np.zeros(len(mean))
        np.divide(typical[n - 1 :] - mean, deviation * CCI_SCALE, out=tail, where=~flat)
        out[n - 1 :] = tail
    return IndicatorSeries(name=f"CCI{n}", values=out, valid_from=n - 1, params={"n": n})


def bias(values, n: int = 10) -> IndicatorSeries:
    """(C_t - MA_t(n)) / MA_t(n) as a dimensionless fraction."""
    _check_lookback("n", n)
    values = _as_array(values)
    average = sma(values, n).values
    out = _undefined(len(values))
    if len(values) >= n:
        out[n - 1 :] = (values[n - 1 :] - average[n - 1 :]) / average[n - 1 :]
    return IndicatorSeries(name=f"BIAS{n}", values=out, valid_from=n - 1, params={"n": n})


def directional_components(
    series: PriceSeries, convention: DmiConvention = "wilder"
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-bar +DM, -DM and TR for t = 1 .. len-1."""
    high, low, close = series.high, series.low, series.close
    plus_dm = np.maximum(high[1:] - high[:-1], 0.0)
    prev_close = close[:-1]
    if convention == "wilder":
        minus_dm = np.maximum(low[:-1] - low[1:], 0.0)
        true_range = np.maximum.reduce(
            [high[1:] - low[1:], np.abs(high[1:] - prev_close), np.abs(low[1:] - prev_close)]
        )
    elif convention == "low_rise":
        minus_dm = np.maximum(low[1:] - low[:-1], 0.0)
        true_range = np.maximum.reduce(
            [high[1:] - low[1:], high[1:] - prev_close, low[1:] - prev_close]
        )
    else:
        raise ArgumentError(f"unknown DMI convention {convention!r}")
    return plus_dm, minus_dm, true_range


def dmi(
    series: PriceSeries, n: int = 14, convention: DmiConvention = "wilder"
) -> tuple[IndicatorSeries, IndicatorSeries]:
    """+DI and -DI: 100 * (sum of DM over n bars) / (sum of TR over n bars).

    A zero TR sum gives both lines 0.
    """
    _check_lookback("n", n)
    plus_values = _undefined(len(series))
    minus_values = _undefined(len(series))
    if len(series) > n:
        plus_dm, minus_dm, true_range = directional_components(series, convention)
        tr_sum = _rolling(true_range, n).sum(axis=1)
        nonzero = tr_sum != 0
        plus_tail = np.zeros(len(tr_sum))
        minus_tail = np.zeros(len(tr_sum))
        np.divide(_rolling(plus_dm, n).sum(axis=1), tr_sum, out=plus_tail, where=nonzero)
        np.divide(_rolling(minus_dm, n).sum(axis=1), tr_sum, out=minus_tail, where=nonzero)
        plus_values[n:] = 100.0 * plus_tail
        minus_values[n:] = 100.0 * minus_tail

    params = {"n": n}
    return (
        IndicatorSeries(name="+DI", values=plus_values, valid_from=n, params=params),
        IndicatorSeries(name="-DI", values=minus_values, valid_from=n, params=params),
    )


def price(series: PriceSeries) -> IndicatorSeries:
    """The close itself, as an always-defined series named C."""
    return IndicatorSeries(name="C", values=series.close, valid_from=0)
