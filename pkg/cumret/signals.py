"""Crossover signal generation for the technical rules and the random strategy."""

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Literal, Optional, Union

import numpy as np

from . import indicators as ind
from .config import IndicatorConfig, RandomStrategyConfig
from .errors import ArgumentError
from .indicators import IndicatorParams, IndicatorSeries
from .logging_setup import get_logger, log_once
from .marketdata import PriceSeries

logger = get_logger("signals")

Direction = Literal["up", "down"]
Operand = Union[str, float]

RULE_NAMES = (
    "SMA",
    "EMA",
    "MOM",
    "KD",
    "MACD",
    "RSI",
    "PSY",
    "CCI",
    "MA",
    "BIAS",
    "ROC",
    "DMI",
    "RND",
)


class SignalKind(str, Enum):
    """Trade decision kinds."""

    BUY = "Buy"
    SELL = "Sell"


@dataclass(frozen=True)
class Guard:
    """Predicate on a third series evaluated at the crossing bar, e.g. D < 20."""

    series: str
    op: Literal["<", ">"]
    threshold: float

    def mask(self, indicators: Mapping[str, IndicatorSeries]) -> np.ndarray:
        values = indicators[self.series].values
        if self.op == "<":
            return values < self.threshold
        return values > self.threshold


@dataclass(frozen=True)
class CrossSpec:
    """left crosses right in the given direction, optionally guarded."""

    left: Operand
    right: Operand
    direction: Direction
    guard: Optional[Guard] = None

    def __post_init__(self):
        if self.left == self.right:
            raise ArgumentError(f"cross operands must differ, got {self.left!r} twice")
        if self.direction not in ("up", "down"):
            raise ArgumentError(f"unknown cross direction {self.direction!r}")

    def references(self) -> list[str]:
        names = [op for op in (self.left, self.right) if isinstance(op, str)]
        if self.guard is not None:
            names.append(self.guard.series)
        return names


IndicatorBuilder = Callable[[PriceSeries, IndicatorConfig], dict[str, IndicatorSeries]]


@dataclass(frozen=True)
class RuleSpec:
    """A named rule: indicator bundle plus its buy and sell crossings.

    The random strategy carries no crossings.
    """

    name: str
    params: IndicatorParams
    buy: Optional[CrossSpec] = None
    sell: Optional[CrossSpec] = None
    build: Optional[IndicatorBuilder] = None

    @property
    def is_random(self) -> bool:
        return self.build is None

    def indicators(
        self, series: PriceSeries, config: Optional[IndicatorConfig] = None
    ) -> dict[str, IndicatorSeries]:
        if self.build is None:
            raise ArgumentError(f"rule {self.name} has no indicators")
        return self.build(series, config or IndicatorConfig())


@dataclass(frozen=True)
class SignalEvent:
    index: int
    kind: SignalKind


@dataclass(frozen=True)
class SignalSeries:
    """Raw decision stream with strictly increasing indices."""

    events: tuple[SignalEvent, ...] = ()

    def __post_init__(self):
        if not isinstance(self.events, tuple):
            object.__setattr__(self, "events", tuple(self.events))
        for prev, cur in zip(self.events, self.events[1:]):
            if cur.index <= prev.index:
                raise ArgumentError(
                    f"signal indices must increase, got {prev.index} then {cur.index}"
                )

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def within(self, enter: int, exit: int) -> "SignalSeries":
        """Events with enter <= index <= exit."""
        return SignalSeries(tuple(e for e in self.events if enter <= e.index <= exit))

    def shifted(self, offset: int) -> "SignalSeries":
        return SignalSeries(tuple(SignalEvent(e.index + offset, e.kind) for e in self.events))


def _operand_values(operand: Operand, indicators: Mapping[str, IndicatorSeries], length: int):
    if isinstance(operand, str):
        if operand not in indicators:
            raise ArgumentError(f"cross references unknown series {operand!r}")
        return indicators[operand].values
    return np.full(length, float(operand))


def _value_at(series, t: int) -> float:
    if isinstance(series, IndicatorSeries):
        return float(series.values[t]) if series.is_defined(t) else float("nan")
    if np.isscalar(series):
        return float(series)
    values = np.asarray(series, dtype=np.float64)
    if not 0 <= t < len(values):
        return float("nan")
    return float(values[t])


def detect_cross(x, y, t: int, direction: Direction) -> bool:
    """Whether x crosses y at bar t.

    Up: x[t-1] <= y[t-1] and x[t] > y[t]. Down: x[t-1] >= y[t-1] and
    x[t] < y[t]. Undefined values or t = 0 give False, never an error.
    """
    if t <= 0:
        return False
    x_prev, x_now = _value_at(x, t - 1), _value_at(x, t)
    y_prev, y_now = _value_at(y, t - 1), _value_at(y, t)
    if np.isnan([x_prev, x_now, y_prev, y_now]).any():
        return False
    if direction == "up":
        return x_prev <= y_prev and x_now > y_now
    if direction == "down":
        return x_prev >= y_prev and x_now < y_now
    raise ArgumentError(f"unknown cross direction {direction!r}")


def cross_mask(x: np.ndarray, y: np.ndarray, direction: Direction) -> np.ndarray:
    """Vectorised detect_cross over every bar; NaN compares false."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    mask = np.zeros(len(x), dtype=bool)
    if len(x) < 2:
        return mask
    if direction == "up":
        mask[1:] = (x[:-1] <= y[:-1]) & (x[1:] > y[1:])
    elif direction == "down":
        mask[1:] = (x[:-1] >= y[:-1]) & (x[1:] < y[1:])
    else:
        raise ArgumentError(f"unknown cross direction {direction!r}")
    return mask


def cross_events(spec: CrossSpec, indicators: Mapping[str, IndicatorSeries]) -> np.ndarray:
    """Bars where the rule fires, after its guard and warm-up gating."""
    length = len(next(iter(indicators.values())))
    left = _operand_values(spec.left, indicators, length)
    right = _operand_values(spec.right, indicators, length)
    mask = cross_mask(left, right, spec.direction)
    if spec.guard is not None:
        mask &= spec.guard.mask(indicators)
    warmup = max(indicators[name].valid_from for name in spec.references())
    mask[:warmup] = False
    return mask


def _close(series: PriceSeries) -> IndicatorSeries:
    return ind.price(series)


def _build_sma(n):
    def build(series, config):
        return {"C": _close(series), "SMA": ind.sma(series.close, n)}

    return build


def _build_ema_pair(n, m):
    def build(series, config):
        return {
            "FAST": ind.ema(series.close, n, config.alpha_mode),
            "SLOW": ind.ema(series.close, m, config.alpha_mode),
        }

    return build


def _build_ma_pair(n, m):
    def build(series, config):
        return {"FAST": ind.sma(series.close, n), "SLOW": ind.sma(series.close, m)}

    return build


def _build_momentum(n, kind):
    def build(series, config):
        return {kind: ind.momentum_family(series.close, n, kind)}

    return build


def _build_kd(n, m):
    def build(series, config):
        k_line, d_line = ind.stochastic_kd(series, n, m)
        return {"K": k_line, "D": d_line}

    return build


def _build_macd(n, m):
    def build(series, config):
        return {"MACD": ind.macd_line(series.close, n, m, config.alpha_mode)}

    return build


def _build_single(name, fn, n, uses_bars=False):
    def build(series, config):
        source = series if uses_bars else series.close
        return {name: fn(source, n)}

    return build


def _build_dmi(n):
    def build(series, config):
        plus_di, minus_di = ind.dmi(series, n, config.dmi_convention)
        return {"+DI": plus_di, "-DI": minus_di}

    return build


def _threshold_rule(name, params, series_name, buy_level, sell_level, build) -> RuleSpec:
    return RuleSpec(
        name=name,
        params=params,
        buy=CrossSpec(series_name, buy_level, "up"),
        sell=CrossSpec(series_name, sell_level, "down"),
        build=build,
    )


def _pair_rule(name, params, fast, slow, build) -> RuleSpec:
    return RuleSpec(
        name=name,
        params=params,
        buy=CrossSpec(fast, slow, "up"),
        sell=CrossSpec(fast, slow, "down"),
        build=build,
    )


def get_rule(name: str, config: Optional[IndicatorConfig] = None) -> RuleSpec:
    """RuleSpec with its default parameters.

    Raises:
        ArgumentError: unknown rule name.
    """
    config = config or IndicatorConfig()
    key = name.upper()

    if key == "SMA":
        # Buy when the average crosses up through the close
        return _pair_rule(key, IndicatorParams(20), "SMA", "C", _build_sma(20))
    if key == "EMA":
        return _pair_rule(key, IndicatorParams(5, 20), "FAST", "SLOW", _build_ema_pair(5, 20))
    if key == "MOM":
        level = 100.0
        if config.zero_mom_threshold:
            level = 0.0
            log_once(
                logger,
                logging.WARNING,
                "MOM with threshold 0 never crosses: the ratio form is always positive",
                key="zero_mom_threshold",
            )
        return _threshold_rule(key, IndicatorParams(10), "MOM", level, level, _build_momentum(10, "MOM"))
    if key == "KD":
        return RuleSpec(
            name=key,
            params=IndicatorParams(12, 12),
            buy=CrossSpec("K", "D", "up", Guard("D", "<", 20.0)),
            sell=CrossSpec("K", "D", "down", Guard("D", ">", 80.0)),
            build=_build_kd(12, 12),
        )
    if key == "MACD":
        return _threshold_rule(key, IndicatorParams(12, 26), "MACD", 0.0, 0.0, _build_macd(12, 26))
    if key == "RSI":
        return _threshold_rule(key, IndicatorParams(14), "RSI", 30.0, 70.0, _build_single("RSI", ind.rsi, 14))
    if key == "PSY":
        return _threshold_rule(key, IndicatorParams(10), "PSY", 0.25, 0.75, _build_single("PSY", ind.psy, 10))
    if key == "CCI":
        return _threshold_rule(
            key, IndicatorParams(9), "CCI", -100.0, 100.0, _build_single("CCI", ind.cci, 9, uses_bars=True)
        )
    if key == "MA":
        return _pair_rule(key, IndicatorParams(5, 20), "FAST", "SLOW", _build_ma_pair(5, 20))
    if key == "BIAS":
        return _threshold_rule(key, IndicatorParams(10), "BIAS", -0.045, 0.05, _build_single("BIAS", ind.bias, 10))
    if key == "ROC":
        return _threshold_rule(key, IndicatorParams(13), "ROC", 0.0, 0.0, _build_momentum(13, "ROC"))
    if key == "DMI":
        return _pair_rule(key, IndicatorParams(14), "+DI", "-DI", _build_dmi(14))
    if key == "RND":
        return RuleSpec(name=key, params=IndicatorParams(1, 29))

    raise ArgumentError(f"unknown rule {name!r}; expected one of {', '.join(RULE_NAMES)}")


def generate_signals(
    rule: RuleSpec,
    series: PriceSeries,
    config: Optional[IndicatorConfig] = None,
    indicators: Optional[Mapping[str, IndicatorSeries]] = None,
) -> SignalSeries:
    """Raw Buy/Sell stream of a technical rule over the whole series.

    A bar where both crossings fire emits nothing. Position filtering is
    left to backtest.pair_trades.
    """
    if rule.is_random:
        raise ArgumentError("the random strategy draws its signals with random_signals")

    bundle = indicators if indicators is not None else rule.indicators(series, config)
    buys = cross_events(rule.buy, bundle)
    sells = cross_events(rule.sell, bundle)
    both = buys & sells
    buys &= ~both
    sells &= ~both

    events = [SignalEvent(int(t), SignalKind.BUY) for t in np.flatnonzero(buys)]
    events += [SignalEvent(int(t), SignalKind.SELL) for t in np.flatnonzero(sells)]
    events.sort(key=lambda e: e.index)
    logger.debug(
        f"{rule.name} on {series.symbol}: {int(buys.sum())} buys, {int(sells.sum())} sells"
    )
    return SignalSeries(tuple(events))


def random_signals(
    rng: np.random.Generator,
    horizon: int,
    min_gap: int = 1,
    max_gap: int = 29,
) -> SignalSeries:
    """Alternating Buy/Sell at uniformly drawn integer gaps, starting with Buy.

    Event positions are cumulative gap sums strictly below horizon.
    """
    if not 1 <= min_gap <= max_gap:
        raise ArgumentError(f"need 1 <= min_gap <= max_gap, got {min_gap}, {max_gap}")
    if horizon < min_gap:
        return SignalSeries()

    max_events = horizon // min_gap + 1
    gaps = rng.integers(min_gap, max_gap, size=max_events, endpoint=True)
    positions = np.cumsum(gaps)
    positions = positions[positions < horizon]
    kinds = (SignalKind.BUY, SignalKind.SELL)
    return SignalSeries(
        tuple(SignalEvent(int(t), kinds[i % 2]) for i, t in enumerate(positions))
    )


def random_signals_from_config(
    rng: np.random.Generator, horizon: int, config: Optional[RandomStrategyConfig] = None
) -> SignalSeries:
    config = config or RandomStrategyConfig()
    return random_signals(rng, horizon, config.min_gap, config.max_gap)
