"""Random-window resampling harness over rules and index series.

Each replica draws an entering and an exiting bar, backtests the rule on
that window and records r_bar, R, CAGR and the buy-and-hold CAGR of the same
window. Replica i draws from its own stream keyed by (seed, rule, i), so the
summary is identical for any worker count or execution order.
"""

import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Union

import numpy as np

from .backtest import run_backtest
from .boundcheck import check_bound
from .config import BootstrapConfig, IndicatorConfig, RandomStrategyConfig
from .errors import ArgumentError
from .hashutil import stream_key
from .logging_setup import get_logger
from .marketdata import PriceSeries
from .signals import RuleSpec, SignalSeries, generate_signals, get_rule

logger = get_logger("bootstrap")

QUANTILE_LEVELS = (0.05, 0.25, 0.50, 0.75, 0.95)
QUANTILE_NAMES = ("q05", "q25", "q50", "q75", "q95")


@dataclass(frozen=True)
class ReplicaResult:
    i: int
    enter: int
    exit: int
    n: int
    r_bar: float
    R: float
    cagr: float
    cmv: float
    sum_returns: float
    bound_holds: bool

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class BootstrapSummary:
    rule: str
    symbol: str
    M: int
    k: float
    mean_r_bar: float
    pooled_r_bar: float
    mean_R: float
    mean_cagr: float
    cagr_quantiles: dict[str, float]
    mean_n: float
    replicas_with_no_trades: int
    trading_replicas: int
    mean_cmv: float
    bound_violations: int
    replicas: tuple[ReplicaResult, ...] = field(default=(), repr=False)

    def to_dict(self, include_replicas: bool = False) -> dict[str, Any]:
        data = asdict(self)
        if include_replicas:
            data["replicas"] = [r.to_dict() for r in self.replicas]
        else:
            data.pop("replicas")
        return data


@dataclass(frozen=True)
class _ReplicaJob:
    """Picklable unit of work for one contiguous block of replica indices."""

    series: PriceSeries
    rule_name: str
    signals: Optional[SignalSeries]
    start: int
    stop: int
    seed: int
    k: float
    min_window: int
    bars_per_year: int
    indicator_config: IndicatorConfig
    random_config: RandomStrategyConfig


def sample_window(
    rng: np.random.Generator, series_len: int, min_window: int
) -> tuple[int, int]:
    """Uniform enter on [0, len-1-min_window], then uniform exit on [enter+min_window, len-1].

    Raises:
        ArgumentError: series_len <= min_window.
    """
    if min_window < 1:
        raise ArgumentError(f"min_window must be >= 1, got {min_window}")
    if series_len <= min_window:
        raise ArgumentError(
            f"series of {series_len} bars is too short for min_window {min_window}"
        )
    enter = int(rng.integers(0, series_len - 1 - min_window, endpoint=True))
    exit = int(rng.integers(enter + min_window, series_len - 1, endpoint=True))
    return enter, exit


def replica_rng(seed: int, rule_name: str, i: int) -> np.random.Generator:
    """Independent stream for replica i of a rule."""
    return np.random.default_rng(np.random.SeedSequence([seed, stream_key(rule_name), i]))


def _run_replicas(job: _ReplicaJob) -> list[ReplicaResult]:
    rule = get_rule(job.rule_name, job.indicator_config)
    results = []
    for i in range(job.start, job.stop):
        rng = replica_rng(job.seed, rule.name, i)
        window = sample_window(rng, len(job.series), job.min_window)
        result = run_backtest(
            rule,
            job.series,
            window,
            job.k,
            rng,
            signals=job.signals,
            random_config=job.random_config,
            bars_per_year=job.bars_per_year,
        )
        report = check_bound(result.returns, job.k)
        results.append(
            ReplicaResult(
                i=i,
                enter=window[0],
                exit=window[1],
                n=result.n,
                r_bar=result.r_bar,
                R=result.R,
                cagr=result.cagr,
                cmv=result.market_cagr,
                sum_returns=math.fsum(result.returns),
                bound_holds=report.holds,
            )
        )
    return results


def _chunks(M: int, workers: int) -> list[tuple[int, int]]:
    count = min(M, workers * 4)
    bounds = np.linspace(0, M, count + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def aggregate(
    rule: str, symbol: str, k: float, replicas: Sequence[ReplicaResult]
) -> BootstrapSummary:
    """Fold replica records in index order into a summary."""
    replicas = tuple(sorted(replicas, key=lambda r: r.i))
    if not replicas:
        raise ArgumentError("cannot summarize zero replicas")
    trading = [r for r in replicas if r.n > 0]
    total_trades = sum(r.n for r in replicas)
    cagrs = np.array([r.cagr for r in replicas])
    quantiles = np.quantile(cagrs, QUANTILE_LEVELS)

    return BootstrapSummary(
        rule=rule,
        symbol=symbol,
        M=len(replicas),
        k=k,
        mean_r_bar=_mean([r.r_bar for r in trading]),
        pooled_r_bar=math.fsum(r.sum_returns for r in replicas) / total_trades if total_trades else 0.0,
        mean_R=_mean([r.R for r in replicas]),
        mean_cagr=_mean([r.cagr for r in replicas]),
        cagr_quantiles={name: float(q) for name, q in zip(QUANTILE_NAMES, quantiles)},
        mean_n=total_trades / len(replicas),
        replicas_with_no_trades=len(replicas) - len(trading),
        trading_replicas=len(trading),
        mean_cmv=_mean([r.cmv for r in replicas]),
        bound_violations=sum(1 for r in replicas if not r.bound_holds),
        replicas=replicas,
    )


def run_bootstrap(
    config: BootstrapConfig,
    series: PriceSeries,
    rule: Union[RuleSpec, str],
    indicator_config: Optional[IndicatorConfig] = None,
    random_config: Optional[RandomStrategyConfig] = None,
) -> BootstrapSummary:
    """M random-window backtests of one rule on one series.

    Indicators and signals are computed once on the full series and shared by
    every replica; windows only select which signals trade.
    """
    indicator_config = indicator_config or IndicatorConfig()
    random_config = random_config or RandomStrategyConfig()
    if isinstance(rule, str):
        rule = get_rule(rule, indicator_config)
    if len(series) <= config.min_window:
        raise ArgumentError(
            f"{series.symbol}: {len(series)} bars, need more than min_window={config.min_window}"
        )

    signals = None if rule.is_random else generate_signals(rule, series, indicator_config)
    jobs = [
        _ReplicaJob(
            series=series,
            rule_name=rule.name,
            signals=signals,
            start=start,
            stop=stop,
            seed=config.seed,
            k=config.k,
            min_window=config.min_window,
            bars_per_year=config.bars_per_year,
            indicator_config=indicator_config,
            random_config=random_config,
        )
        for start, stop in _chunks(config.M, config.workers)
    ]

    logger.info(
        f"Bootstrap {rule.name} on {series.symbol}: M={config.M}, k={config.k}, "
        f"workers={config.workers}"
    )
    if config.workers == 1:
        replicas = [r for job in jobs for r in _run_replicas(job)]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            replicas = [r for chunk in pool.map(_run_replicas, jobs) for r in chunk]

    summary = aggregate(rule.name, series.symbol, config.k, replicas)
    if summary.bound_violations:
        logger.error(
            f"{rule.name} on {series.symbol}: {summary.bound_violations} replicas failed the bound audit"
        )
    logger.info(
        f"{rule.name} on {series.symbol}: mean_R={summary.mean_R:.6f} "
        f"mean_cagr={summary.mean_cagr:.6f} no-trade replicas={summary.replicas_with_no_trades}"
    )
    return summary


@dataclass
class TablesReport:
    """Rules x indices matrices plus box-plot and market comparison rows."""

    rules: list[str]
    indices: list[str]
    r_bar_matrix: list[dict[str, Any]]
    cagr_matrix: list[dict[str, Any]]
    boxdata: list[dict[str, Any]]
    comparison: list[dict[str, Any]]

    def table_fieldnames(self, with_reference: bool) -> list[str]:
        names = ["rule", *self.indices]
        if with_reference:
            names += [f"{index}_published" for index in self.indices]
        return names


def _reference_value(reference, table: str, rule: str, index: str):
    if reference is None:
        return ""
    try:
        return reference.lookup(table, rule, index)
    except ArgumentError:
        return ""


def summarize_tables(
    summaries: Mapping[str, Mapping[str, BootstrapSummary]],
    reference=None,
) -> TablesReport:
    """Lay out mean r_bar and mean CAGR as rule rows by index columns.

    The CAGR matrix ends with a CMV row: per index, the mean buy-and-hold CAGR over
    all rules' windows. With reference tables, the published value of each
    cell is attached as an <index>_published column.
    """
    if not summaries or not any(summaries.values()):
        raise ArgumentError("summarize_tables needs at least one summary")

    rules = list(summaries)
    indices: list[str] = []
    for per_index in summaries.values():
        for index in per_index:
            if index not in indices:
                indices.append(index)

    def matrix_row(table: str, rule: str, attr: str) -> dict[str, Any]:
        row: dict[str, Any] = {"rule": rule}
        for index in indices:
            summary = summaries[rule].get(index)
            row[index] = getattr(summary, attr) if summary else ""
            if reference is not None:
                row[f"{index}_published"] = _reference_value(reference, table, rule, index)
        return row

    r_bar_matrix = [matrix_row("r_bar", rule, "mean_r_bar") for rule in rules]
    cagr_matrix = [matrix_row("cagr", rule, "mean_cagr") for rule in rules]

    cmv_row: dict[str, Any] = {"rule": "CMV"}
    cmv_by_index: dict[str, float] = {}
    for index in indices:
        values = [s[index].mean_cmv for s in summaries.values() if index in s]
        cmv_by_index[index] = _mean(values)
        cmv_row[index] = cmv_by_index[index]
        if reference is not None:
            cmv_row[f"{index}_published"] = _reference_value(reference, "cmv", "CMV", index)
    cagr_matrix.append(cmv_row)

    boxdata = []
    for rule in rules:
        for index in indices:
            summary = summaries[rule].get(index)
            if summary is None:
                continue
            boxdata.append({"rule": rule, "index": index, **summary.cagr_quantiles})

    comparison = []
    for index in indices:
        present = {rule: summaries[rule][index] for rule in rules if index in summaries[rule]}
        rnd = present.get("RND")
        technical = {rule: s for rule, s in present.items() if rule != "RND"}
        comparison.append(
            {
                "index": index,
                "cmv": cmv_by_index[index],
                "rules": len(technical),
                "rules_below_cmv": sum(
                    1 for s in technical.values() if s.mean_cagr < cmv_by_index[index]
                ),
                "rules_beating_rnd": (
                    sum(1 for s in technical.values() if s.mean_cagr > rnd.mean_cagr)
                    if rnd is not None
                    else ""
                ),
                "positive_cagr_rules": sum(1 for s in technical.values() if s.mean_cagr > 0),
            }
        )

    return TablesReport(
        rules=rules,
        indices=indices,
        r_bar_matrix=r_bar_matrix,
        cagr_matrix=cagr_matrix,
        boxdata=boxdata,
        comparison=comparison,
    )
