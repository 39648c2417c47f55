"""Cost-rate and trade-count sweeps producing plot-ready rows."""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .backtest import run_backtest
from .bootstrap import run_bootstrap
from .boundcheck import check_bound
from .config import BootstrapConfig, IndicatorConfig, RandomStrategyConfig
from .errors import ArgumentError
from .hashutil import stream_key
from .logging_setup import get_logger
from .returns import ReturnSeries
from .signals import get_rule

logger = get_logger("sweeps")

AUDIT_TOLERANCE = 1e-9


@dataclass
class CurveReport:
    rows: list[dict[str, Any]] = field(default_factory=list)
    violations: int = 0

    @property
    def ok(self) -> bool:
        return self.violations == 0


def k_grid_values(lo: float, hi: float, step: float) -> list[float]:
    """Inclusive grid lo, lo+step, ..., hi with values rounded to 12 places."""
    if not 0.0 <= lo <= hi < 1.0:
        raise ArgumentError(f"k grid needs 0 <= lo <= hi < 1, got lo={lo}, hi={hi}")
    if lo == hi:
        return [float(lo)]
    if not step > 0:
        raise ArgumentError(f"k grid step must be positive, got {step}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def sweep_k(
    rules: Sequence[str],
    series,
    k_grid: tuple[float, float, float],
    config: Optional[BootstrapConfig] = None,
    indicator_config: Optional[IndicatorConfig] = None,
    random_config: Optional[RandomStrategyConfig] = None,
) -> list[dict[str, Any]]:
    """Bootstrap mean_R for every (rule, k) on the grid.

    Windows and signals do not depend on k, so each rule's rows differ only
    through the per-trade cost factor.
    """
    config = config or BootstrapConfig()
    grid = k_grid_values(*k_grid)
    rows = []
    for name in rules:
        for k in grid:
            summary = run_bootstrap(
                config.model_copy(update={"k": k}), series, name, indicator_config, random_config
            )
            rows.append(
                {"rule": summary.rule, "k": k, "mean_R": summary.mean_R, "mean_n": summary.mean_n}
            )
        logger.info(f"sweep-k {name}: {len(grid)} cost rates")
    return rows


def running_curves(returns: Iterable[float], k_list: Sequence[float]) -> CurveReport:
    """R and the upper bound after each of the first n trades, per k.

    Every prefix goes through check_bound, so the curve and the audit agree.
    """
    rs = returns if isinstance(returns, ReturnSeries) else ReturnSeries(tuple(returns))
    report = CurveReport()
    for k in k_list:
        if not 0.0 <= k < 1.0:
            raise ArgumentError(f"transaction cost rate k must lie in [0, 1), got {k}")
        for n in range(1, len(rs) + 1):
            audit = check_bound(ReturnSeries(rs.values[:n]), k, AUDIT_TOLERANCE)
            if not audit.holds:
                report.violations += 1
            report.rows.append({"k": float(k), "n": n, "R": audit.R, "bound": audit.bound})
    if report.violations:
        logger.error(f"running curves: {report.violations} rows exceed the upper bound")
    return report


def sweep_n(
    rule: str,
    series,
    k_list: Sequence[float],
    n_max: int,
    seed: int = 42,
    indicator_config: Optional[IndicatorConfig] = None,
    random_config: Optional[RandomStrategyConfig] = None,
) -> CurveReport:
    """Running curves of one rule's trades along the full series, first n_max trades."""
    if n_max < 1:
        raise ArgumentError(f"n_max must be >= 1, got {n_max}")
    spec = get_rule(rule, indicator_config)
    rng = np.random.default_rng(np.random.SeedSequence([seed, stream_key(spec.name)]))
    result = run_backtest(
        spec,
        series,
        None,
        0.0,
        rng,
        indicator_config=indicator_config,
        random_config=random_config,
    )
    returns = result.returns[:n_max]
    if len(returns) < n_max:
        logger.warning(
            f"sweep-n {spec.name} on {series.symbol}: only {len(returns)} trades, "
            f"fewer than n_max={n_max}"
        )
    return running_curves(returns, k_list)
