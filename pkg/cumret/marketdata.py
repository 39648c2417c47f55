"""Daily OHLCV ingestion, validation and windowing (Yahoo-Finance CSV layout)."""

import io
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from .errors import ArgumentError, DataValidationError
from .logging_setup import get_logger, log_once

logger = get_logger("marketdata")

HEADER = ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"]
_NUMERIC_COLUMNS = HEADER[1:]


@dataclass(frozen=True)
class Bar:
    """One trading day. Close (not Adj Close) feeds every computation."""

    date: str
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: float


@dataclass(frozen=True)
class PriceSeries:
    """Ordered daily bars of one symbol.

    Dates are opaque ISO-8601 keys; strictly increasing, at least two bars.
    """

    symbol: str
    bars: tuple[Bar, ...]
    parse_warnings: tuple[str, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.bars, tuple):
            object.__setattr__(self, "bars", tuple(self.bars))
        if len(self.bars) < 2:
            raise DataValidationError(
                [f"{self.symbol}: need at least 2 bars, got {len(self.bars)}"]
            )
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date <= prev.date:
                raise DataValidationError(
                    [f"{self.symbol}: non-monotone dates at {prev.date} -> {cur.date}"]
                )

    def __len__(self) -> int:
        return len(self.bars)

    def _column(self, name: str) -> np.ndarray:
        values = np.array([getattr(bar, name) for bar in self.bars], dtype=np.float64)
        values.setflags(write=False)
        return values

    @cached_property
    def close(self) -> np.ndarray:
        return self._column("close")

    @cached_property
    def high(self) -> np.ndarray:
        return self._column("high")

    @cached_property
    def low(self) -> np.ndarray:
        return self._column("low")

    @property
    def dates(self) -> list[str]:
        return [bar.date for bar in self.bars]


@dataclass
class ValidationReport:
    """Outcome of validate(); a report with fatal errors blocks downstream use."""

    symbol: str
    bar_count: int
    fatal_errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.fatal_errors

    def to_dict(self) -> dict:
        return {
            "symbol": self.symbol,
            "ok": self.ok,
            "bar_count": self.bar_count,
            "fatal_errors": list(self.fatal_errors),
            "warnings": list(self.warnings),
        }


def _parse_number(text: str) -> float:
    # float() parses repr() output back to the identical double
    try:
        return float(text)
    except ValueError:
        return float("nan")


def parse_ohlcv(text: str, symbol: str = "UNKNOWN") -> PriceSeries:
    """Parse a Yahoo-Finance daily CSV document.

    Rows with any non-numeric field (Yahoo writes "null") are dropped and
    recorded as parse warnings; nothing is interpolated.

    Raises:
        DataValidationError: bad header, bad date, no usable rows,
            or non-increasing dates.
    """
    try:
        frame = pd.read_csv(
            io.StringIO(text), dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except pd.errors.EmptyDataError as e:
        raise DataValidationError([f"{symbol}: missing header"]) from e

    columns = [str(c).strip() for c in frame.columns]
    if columns != HEADER:
        raise DataValidationError(
            [f"{symbol}: unknown header {','.join(columns)!r}, expected {','.join(HEADER)!r}"]
        )
    frame.columns = columns

    dates = frame["Date"].str.strip()
    parsed_dates = pd.to_datetime(dates, format="%Y-%m-%d", errors="coerce")
    bad_dates = dates[parsed_dates.isna()]
    if not bad_dates.empty:
        raise DataValidationError(
            [f"{symbol}: invalid date {bad_dates.iloc[0]!r} (expected YYYY-MM-DD)"]
        )

    numeric = frame[_NUMERIC_COLUMNS].apply(lambda column: column.map(_parse_number))
    numeric = numeric.astype(np.float64)
    usable = numeric.notna().all(axis=1) & np.isfinite(numeric).all(axis=1)

    warnings = []
    for row_number in np.flatnonzero(~usable.to_numpy()):
        warnings.append(
            f"{symbol}: dropped row {row_number + 2} ({dates.iloc[row_number]}): "
            "non-numeric field"
        )
    if warnings:
        log_once(
            logger,
            logging.WARNING,
            f"{symbol}: dropped {len(warnings)} rows with non-numeric fields",
            key=f"dropped:{symbol}:{len(warnings)}",
        )

    if not usable.any():
        raise DataValidationError([f"{symbol}: zero valid rows"])

    kept_dates = dates[usable].tolist()
    kept = numeric[usable].to_numpy(dtype=np.float64)
    bars = tuple(
        Bar(
            date=date,
            open=float(row[0]),
            high=float(row[1]),
            low=float(row[2]),
            close=float(row[3]),
            adj_close=float(row[4]),
            volume=float(row[5]),
        )
        for date, row in zip(kept_dates, kept)
    )

    for prev, cur in zip(kept_dates, kept_dates[1:]):
        if cur <= prev:
            raise DataValidationError([f"{symbol}: non-monotone dates at {prev} -> {cur}"])

    return PriceSeries(symbol=symbol, bars=bars, parse_warnings=tuple(warnings))


def _format_price(value: float) -> str:
    return repr(float(value))


def _format_volume(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def emit_ohlcv(series: PriceSeries) -> str:
    """Render a series back to Yahoo-Finance CSV; parse_ohlcv inverts it."""
    lines = [",".join(HEADER)]
    for bar in series.bars:
        lines.append(
            ",".join(
                [
                    bar.date,
                    _format_price(bar.open),
                    _format_price(bar.high),
                    _format_price(bar.low),
                    _format_price(bar.close),
                    _format_price(bar.adj_close),
                    _format_volume(bar.volume),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def load_ohlcv(path: str | Path, symbol: Optional[str] = None) -> PriceSeries:
    """Read and parse a CSV file; the symbol defaults to the file stem."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    series = parse_ohlcv(text, symbol=symbol or path.stem)
    logger.info(f"Loaded {series.symbol}: {len(series)} bars from {path}")
    return series


def validate(series: PriceSeries) -> ValidationReport:
    """Check price positivity (fatal) and H/L consistency and volume (warnings)."""
    report = ValidationReport(symbol=series.symbol, bar_count=len(series))
    report.warnings.extend(series.parse_warnings)

    for bar in series.bars:
        prices = {"open": bar.open, "high": bar.high, "low": bar.low, "close": bar.close}
        for name, value in prices.items():
            if not value > 0:
                report.fatal_errors.append(f"{bar.date}: non-positive {name} {value}")
        if bar.high < max(bar.open, bar.close):
            report.warnings.append(f"{bar.date}: high {bar.high} below max(open, close)")
        if bar.low > min(bar.open, bar.close):
            report.warnings.append(f"{bar.date}: low {bar.low} above min(open, close)")
        if bar.volume == 0:
            report.warnings.append(f"{bar.date}: zero volume")

    if report.fatal_errors:
        logger.error(f"{series.symbol}: {len(report.fatal_errors)} fatal validation errors")
    elif report.warnings:
        logger.info(f"{series.symbol}: {len(report.warnings)} validation warnings")
    return report


def window(series: PriceSeries, enter: int, exit: int) -> PriceSeries:
    """Inclusive sub-series [enter, exit]; the original is untouched."""
    if not 0 <= enter < exit < len(series):
        raise ArgumentError(
            f"window requires 0 <= enter < exit < {len(series)}, got ({enter}, {exit})"
        )
    return PriceSeries(symbol=series.symbol, bars=series.bars[enter : exit + 1])


def synthetic_walk(
    rng: np.random.Generator,
    n_bars: int,
    start_price: float = 100.0,
    drift: float = 0.0003,
    volatility: float = 0.01,
    symbol: str = "SYNTH",
    start_date: str = "2000-01-03",
) -> PriceSeries:
    """Geometric random-walk OHLCV fixture on business days.

    High and low bracket open and close, so the series validates clean.
    """
    if n_bars < 2:
        raise ArgumentError(f"n_bars must be >= 2, got {n_bars}")

    log_steps = rng.normal(drift, volatility, size=n_bars)
    close = start_price * np.exp(np.cumsum(log_steps))
    open_ = np.empty(n_bars)
    open_[0] = start_price
    open_[1:] = close[:-1]
    spread = np.abs(rng.normal(0.0, volatility / 2, size=n_bars)) * close
    high = np.maximum(open_, close) + spread
    low = np.minimum(open_, close) - spread
    low = np.maximum(low, np.minimum(open_, close) * 0.5)
    volume = rng.integers(1_000_000, 5_000_000, size=n_bars)
    dates = pd.bdate_range(start=start_date, periods=n_bars).strftime("%Y-%m-%d")

    bars = tuple(
        Bar(
            date=str(date),
            open=float(o),
            high=float(h),
            low=float(lo),
            close=float(c),
            adj_close=float(c),
            volume=float(v),
        )
        for date, o, h, lo, c, v in zip(dates, open_, high, low, close, volume)
    )
    return PriceSeries(symbol=symbol, bars=bars)


def constant_series(
    n_bars: int, price: float = 100.0, symbol: str = "FLAT", start_date: str = "2000-01-03"
) -> PriceSeries:
    """A series whose every OHLC field equals price."""
    return series_from_closes([price] * n_bars, symbol=symbol, start_date=start_date)


def series_from_closes(
    closes, symbol: str = "CLOSES", spread: float = 0.0, start_date: str = "2000-01-03"
) -> PriceSeries:
    """Build bars from a close path; open = close, high/low = close +/- spread."""
    closes = [float(c) for c in closes]
    dates = pd.bdate_range(start=start_date, periods=len(closes)).strftime("%Y-%m-%d")
    bars = tuple(
        Bar(date=str(d), open=c, high=c + spread, low=c - spread, close=c, adj_close=c, volume=1000.0)
        for d, c in zip(dates, closes)
    )
    return PriceSeries(symbol=symbol, bars=bars)
