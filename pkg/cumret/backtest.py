"""Trade matching, per-trade returns, cumulative return and CAGR."""

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .config import IndicatorConfig, RandomStrategyConfig
from .errors import ArgumentError
from .logging_setup import get_logger
from .marketdata import PriceSeries
from .returns import ReturnSeries, cumulative_return, mean_return
from .signals import RuleSpec, SignalKind, SignalSeries, generate_signals, random_signals

logger = get_logger("backtest")

__all__ = [
    "Trade",
    "BacktestResult",
    "pair_trades",
    "trade_return",
    "cumulative_return",
    "cagr",
    "buy_and_hold_cagr",
    "run_backtest",
    "signals_for_window",
]


@dataclass(frozen=True)
class Trade:
    """One long round trip executed at closes of buy_index and sell_index."""

    buy_index: int
    sell_index: int
    buy_price: float
    sell_price: float
    forced: bool = False

    def __post_init__(self):
        if self.buy_index >= self.sell_index:
            raise ArgumentError(
                f"trade must sell after buying, got {self.buy_index} -> {self.sell_index}"
            )
        if not (self.buy_price > 0 and self.sell_price > 0):
            raise ArgumentError("trade prices must be positive")

    def to_dict(self) -> dict[str, Any]:
        return {
            "buy_index": self.buy_index,
            "sell_index": self.sell_index,
            "buy_price": self.buy_price,
            "sell_price": self.sell_price,
            "forced": self.forced,
            "return": trade_return(self),
        }


@dataclass(frozen=True)
class BacktestResult:
    rule: str
    trades: tuple[Trade, ...]
    returns: tuple[float, ...]
    R: float
    k: float
    cagr: float
    window: tuple[int, int]
    bars_per_year: int = 252
    market_cagr: Optional[float] = None
    symbol: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return len(self.trades)

    @property
    def r_bar(self) -> float:
        """Mean trade return; 0.0 when nothing traded."""
        return mean_return(self.returns) if self.returns else 0.0

    @property
    def bars(self) -> int:
        return self.window[1] - self.window[0]

    def to_dict(self) -> dict[str, Any]:
        return {
            "rule": self.rule,
            "symbol": self.symbol,
            "window": {"enter": self.window[0], "exit": self.window[1]},
            "n": self.n,
            "r_bar": self.r_bar,
            "R": self.R,
            "k": self.k,
            "cagr": self.cagr,
            "cmv": self.market_cagr,
            "bars_per_year": self.bars_per_year,
            "returns": list(self.returns),
            "trades": [trade.to_dict() for trade in self.trades],
        }


def _check_window(series: PriceSeries, window: tuple[int, int]) -> tuple[int, int]:
    enter, exit = int(window[0]), int(window[1])
    if not 0 <= enter < exit < len(series):
        raise ArgumentError(
            f"window requires 0 <= enter < exit < {len(series)}, got ({enter}, {exit})"
        )
    return enter, exit


def pair_trades(
    signals: SignalSeries, series: PriceSeries, window: Optional[tuple[int, int]] = None
) -> list[Trade]:
    """Long-flat state machine over the signals inside [enter, exit].

    Buy while long and Sell while flat are ignored. A position still open
    at exit is closed at the exit close with forced=True; a Buy on the
    exit bar itself never opens.
    """
    enter, exit = _check_window(series, window or (0, len(series) - 1))
    close = series.close
    trades: list[Trade] = []
    open_index: Optional[int] = None

    for event in signals.within(enter, exit):
        if event.kind is SignalKind.BUY and open_index is None:
            if event.index < exit:
                open_index = event.index
        elif event.kind is SignalKind.SELL and open_index is not None:
            trades.append(
                Trade(open_index, event.index, float(close[open_index]), float(close[event.index]))
            )
            open_index = None

    if open_index is not None:
        trades.append(
            Trade(open_index, exit, float(close[open_index]), float(close[exit]), forced=True)
        )
    return trades


def trade_return(trade: Trade) -> float:
    """r_i = (S(s_i) - S(b_i)) / S(b_i)."""
    return (trade.sell_price - trade.buy_price) / trade.buy_price


def cagr(R: float, bars: int, bars_per_year: int = 252) -> float:
    """Compound annual growth rate R^(1/Y) - 1 with Y = bars / bars_per_year.

    Growth past the largest double reads inf.

    Raises:
        ArgumentError: R <= 0 or bars < 1.
    """
    if not R > 0:
        raise ArgumentError(f"cumulative return must be positive, got {R}")
    if bars < 1:
        raise ArgumentError(f"bars must be >= 1, got {bars}")
    if bars_per_year < 1:
        raise ArgumentError(f"bars_per_year must be >= 1, got {bars_per_year}")
    try:
        return float(R ** (bars_per_year / bars) - 1.0)
    except OverflowError:
        logger.warning(f"CAGR of R={R!r} over {bars} bars overflows; reporting inf")
        return math.inf


def buy_and_hold_cagr(
    series: PriceSeries, window: Optional[tuple[int, int]] = None, bars_per_year: int = 252
) -> float:
    """CMV: CAGR of holding from the enter close to the exit close."""
    enter, exit = _check_window(series, window or (0, len(series) - 1))
    close = series.close
    return cagr(float(close[exit] / close[enter]), exit - enter, bars_per_year)


def signals_for_window(
    rule: RuleSpec,
    series: PriceSeries,
    window: tuple[int, int],
    rng: Optional[np.random.Generator] = None,
    indicator_config: Optional[IndicatorConfig] = None,
    random_config: Optional[RandomStrategyConfig] = None,
) -> SignalSeries:
    """Signals feeding one window.

    Technical rules use the full-series stream; RND draws a fresh stream
    positioned from the enter bar.
    """
    enter, exit = _check_window(series, window)
    if rule.is_random:
        if rng is None:
            raise ArgumentError("the random strategy requires an rng")
        random_config = random_config or RandomStrategyConfig()
        drawn = random_signals(rng, exit - enter + 1, random_config.min_gap, random_config.max_gap)
        return drawn.shifted(enter)
    return generate_signals(rule, series, indicator_config)


def run_backtest(
    rule: RuleSpec,
    series: PriceSeries,
    window: Optional[tuple[int, int]] = None,
    k: float = 0.003,
    rng: Optional[np.random.Generator] = None,
    *,
    signals: Optional[SignalSeries] = None,
    indicator_config: Optional[IndicatorConfig] = None,
    random_config: Optional[RandomStrategyConfig] = None,
    bars_per_year: int = 252,
) -> BacktestResult:
    """Signals -> trades -> returns -> R -> CAGR over one window.

    Pass precomputed full-series signals to skip indicator work; the rng is
    only consulted for the random strategy.
    """
    window = _check_window(series, window or (0, len(series) - 1))
    if signals is None:
        signals = signals_for_window(rule, series, window, rng, indicator_config, random_config)

    trades = pair_trades(signals, series, window)
    returns = ReturnSeries(tuple(trade_return(t) for t in trades), k)
    R = cumulative_return(returns, k)
    bars = window[1] - window[0]
    result = BacktestResult(
        rule=rule.name,
        trades=tuple(trades),
        returns=returns.values,
        R=R,
        k=k,
        cagr=cagr(R, bars, bars_per_year),
        window=window,
        bars_per_year=bars_per_year,
        market_cagr=buy_and_hold_cagr(series, window, bars_per_year),
        symbol=series.symbol,
    )
    logger.debug(
        f"{rule.name} {series.symbol} [{window[0]}, {window[1]}]: "
        f"n={result.n} R={result.R:.6f} cagr={result.cagr:.6f}"
    )
    return result
