"""Return and transaction-cost algebra shared by the backtester and the bound audit."""

import math
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ArgumentError


def _check_k(k: float) -> float:
    if not 0.0 <= k < 1.0:
        raise ArgumentError(f"transaction cost rate k must lie in [0, 1), got {k}")
    return float(k)


@dataclass(frozen=True)
class ReturnSeries:
    """Per-trade simple returns, each strictly above -1."""

    values: tuple[float, ...] = ()
    k: Optional[float] = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        bad = [v for v in values if not v > -1.0]
        if bad:
            raise ArgumentError(f"returns must exceed -1, got {bad[0]}")
        object.__setattr__(self, "values", values)
        if self.k is not None:
            object.__setattr__(self, "k", _check_k(self.k))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def concat(self, other: "ReturnSeries") -> "ReturnSeries":
        return ReturnSeries(self.values + other.values, self.k)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def _as_series(returns) -> ReturnSeries:
    if isinstance(returns, ReturnSeries):
        return returns
    return ReturnSeries(tuple(returns))


def mean_return(returns: ReturnSeries | Iterable[float]) -> float:
    """Arithmetic mean with compensated summation.

    Raises:
        ArgumentError: empty series.
    """
    rs = _as_series(returns)
    if not rs.values:
        raise ArgumentError("mean of an empty return series is undefined")
    return math.fsum(rs.values) / len(rs.values)


def log_cumulative(returns: ReturnSeries | Iterable[float], k: float = 0.0) -> float:
    """Sum of ln((1-k)(1+r_i)); 0 for no trades."""
    rs = _as_series(returns)
    k = _check_k(k)
    n = len(rs.values)
    if n == 0:
        return 0.0
    return n * math.log1p(-k) + math.fsum(math.log1p(r) for r in rs.values)


def cumulative_return(returns: ReturnSeries | Iterable[float], k: float = 0.0) -> float:
    """R(n) = prod (1-k)(1+r_i); the empty product is 1.

    Raises:
        ArgumentError: a return <= -1 or k outside [0, 1).
    """
    rs = _as_series(returns)
    k = _check_k(k)
    growth = 1.0
    for r in rs.values:
        growth *= (1.0 - k) * (1.0 + r)
    return growth
