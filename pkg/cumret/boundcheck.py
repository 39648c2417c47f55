"""Upper-bound audit for cost-adjusted cumulative returns and the decay envelope.

For returns r_1..r_n (each > -1) and cost rate k, the cumulative return
R(n) = prod (1-k)(1+r_i) never exceeds [(1-k)(1+r_mean)]^n. When the mean
trade return does not exceed k the bound itself sits under (1-k^2)^n,
which decays to 0 as trades accumulate.
"""

import math
from collections.abc import Iterable, Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import ArgumentError
from .logging_setup import get_logger
from .returns import ReturnSeries, cumulative_return, log_cumulative, mean_return

logger = get_logger("boundcheck")

DEFAULT_TOLERANCE = 1e-9
# Products longer than this are compared in log space
LOG_SPACE_THRESHOLD = 1000
# Direct products stay normal doubles while |ln| is below this
DIRECT_LOG_LIMIT = 700.0


@dataclass(frozen=True)
class BoundReport:
    n: int
    k: float
    r_bar: float
    R: float
    bound: float
    envelope: Optional[float]
    slack: float
    holds: bool
    log_R: float
    log_bound: float

    def to_dict(self) -> dict:
        return asdict(self)


class DIInequality(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class CurvePoint:
    n: int
    R: float
    bound: float
    envelope: float


@dataclass(frozen=True)
class StressResult:
    cases: int
    violations: int
    max_log_excess: float
    seed: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _check_k(k: float) -> float:
    if not 0.0 <= k < 1.0:
        raise ArgumentError(f"transaction cost rate k must lie in [0, 1), got {k}")
    return float(k)


def _log_bound(n: int, k: float, r_bar: float) -> float:
    if not 1.0 + r_bar > 0:
        raise ArgumentError(f"1 + mean return must be positive, got {1.0 + r_bar}")
    return n * (math.log1p(-k) + math.log1p(r_bar))


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def upper_bound(returns: ReturnSeries | Iterable[float], k: float) -> float:
    """[(1-k)(1+r_mean)]^n; 1.0 for an empty series, inf past the float range."""
    rs = returns if isinstance(returns, ReturnSeries) else ReturnSeries(tuple(returns))
    k = _check_k(k)
    n = len(rs)
    if n == 0:
        return 1.0
    r_bar = mean_return(rs)
    if not 1.0 + r_bar > 0:
        raise ArgumentError(f"1 + mean return must be positive, got {1.0 + r_bar}")
    try:
        return ((1.0 - k) * (1.0 + r_bar)) ** n
    except OverflowError:
        return math.inf


def check_bound(
    returns: ReturnSeries | Iterable[float], k: float, tolerance: float = DEFAULT_TOLERANCE
) -> BoundReport:
    """Full bound report; holds iff R <= bound * (1 + tolerance).

    Long series, and products that would leave the normal double range, are
    compared via logs. R and bound then come from exp() and read inf past
    the largest double; slack is then 0 when the logs agree within tolerance
    and infinite with the sign of log_bound - log_R otherwise.
    """
    rs = returns if isinstance(returns, ReturnSeries) else ReturnSeries(tuple(returns))
    k = _check_k(k)
    n = len(rs)
    r_bar = mean_return(rs) if n else 0.0
    log_R = log_cumulative(rs, k)
    log_bound = _log_bound(n, k, r_bar) if n else 0.0

    direct = (
        n <= LOG_SPACE_THRESHOLD
        and abs(log_R) < DIRECT_LOG_LIMIT
        and abs(log_bound) < DIRECT_LOG_LIMIT
    )
    if direct:
        R = cumulative_return(rs, k)
        bound = upper_bound(rs, k)
        holds = R <= bound * (1.0 + tolerance)
        slack = bound - R
    else:
        R = _exp(log_R)
        bound = _exp(log_bound)
        log_tol = math.log1p(tolerance)
        gap = log_bound - log_R
        holds = gap >= -log_tol
        if math.isinf(R) or math.isinf(bound):
            slack = 0.0 if abs(gap) <= log_tol else math.copysign(math.inf, gap)
        else:
            slack = bound - R

    envelope = decay_envelope(k, n) if 0.0 < k and r_bar <= k else None
    if not holds:
        logger.error(f"bound violated: n={n} k={k} log_R={log_R!r} log_bound={log_bound!r}")
    return BoundReport(
        n=n,
        k=k,
        r_bar=r_bar,
        R=R,
        bound=bound,
        envelope=envelope,
        slack=slack,
        holds=holds,
        log_R=log_R,
        log_bound=log_bound,
    )


def di_inequality_check(returns: ReturnSeries | Iterable[float]) -> DIInequality:
    """Jensen instance for -ln with unit weights.

    lhs = -n ln(mean(1+r_i)), rhs = sum -ln(1+r_i); lhs <= rhs always.
    """
    rs = returns if isinstance(returns, ReturnSeries) else ReturnSeries(tuple(returns))
    n = len(rs)
    if n == 0:
        raise ArgumentError("inequality check needs at least one return")
    lhs = -n * math.log1p(mean_return(rs))
    rhs = -math.fsum(math.log1p(r) for r in rs.values)
    return DIInequality(lhs, rhs, lhs <= rhs + 1e-12 * abs(rhs))


def decay_envelope(k: float, n: int) -> float:
    """(1-k^2)^n for k in (0, 1).

    Raises:
        ArgumentError: k outside (0, 1) or n < 0.
    """
    if not 0.0 < k < 1.0:
        raise ArgumentError(f"envelope needs k in (0, 1), got {k}")
    if n < 0:
        raise ArgumentError(f"trade count must be >= 0, got {n}")
    return math.exp(n * math.log1p(-k * k))


def envelope_horizon(k: float, eps: float = 1e-6) -> int:
    """Smallest N with (1-k^2)^N < eps, from N = ceil(ln eps / ln(1-k^2))."""
    if not 0.0 < k < 1.0:
        raise ArgumentError(f"envelope needs k in (0, 1), got {k}")
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    horizon = math.ceil(math.log(eps) / math.log1p(-k * k))
    # ceil lands on the boundary when the ratio is integral
    while decay_envelope(k, horizon) >= eps:
        horizon += 1
    return horizon


def _curve_returns(
    r_bar_target: float, n_max: int, rng: Optional[np.random.Generator], dispersion: float
) -> np.ndarray:
    if rng is None:
        return np.full(n_max, r_bar_target)
    # Antithetic pairs keep the running mean on target at every even n
    half = (n_max + 1) // 2
    noise = rng.uniform(-dispersion, dispersion, size=half)
    paired = np.column_stack([noise, -noise]).ravel()[:n_max]
    floor = -0.99 - r_bar_target
    return r_bar_target + np.clip(paired, max(floor, -dispersion), dispersion)


def decay_curve(
    k: float,
    r_bar_target: float,
    n_max: int,
    rng: Optional[np.random.Generator] = None,
    dispersion: float = 0.02,
) -> list[CurvePoint]:
    """Running R, bound and envelope as trades accumulate.

    Without an rng every trade returns exactly r_bar_target. The envelope
    column is NaN when r_bar_target > k.
    """
    k = _check_k(k)
    if n_max < 1:
        raise ArgumentError(f"n_max must be >= 1, got {n_max}")
    if not r_bar_target > -1.0:
        raise ArgumentError(f"target mean return must exceed -1, got {r_bar_target}")

    returns = _curve_returns(r_bar_target, n_max, rng, dispersion)
    log_factors = np.log1p(-k) + np.log1p(returns)
    log_R = np.cumsum(log_factors)
    n = np.arange(1, n_max + 1)
    # Accumulate deviations so a noiseless curve keeps its mean exactly on target
    running_mean = r_bar_target + np.cumsum(returns - r_bar_target) / n
    log_bound = n * (np.log1p(-k) + np.log1p(running_mean))

    points = []
    for i in range(n_max):
        if 0.0 < k and running_mean[i] <= k:
            envelope = decay_envelope(k, int(n[i]))
        else:
            envelope = float("nan")
        points.append(
            CurvePoint(
                n=int(n[i]),
                R=_exp(float(log_R[i])),
                bound=_exp(float(log_bound[i])),
                envelope=envelope,
            )
        )
    return points


def _stress_partition(seed: int, partition: int, cases: int, n_max: int, tolerance: float):
    rng = np.random.default_rng(np.random.SeedSequence([seed, partition]))
    violations = 0
    worst = -math.inf
    for _ in range(cases):
        n = int(rng.integers(1, n_max, endpoint=True))
        k = float(rng.uniform(0.0, 0.5))
        report = check_bound(rng.uniform(-0.9, 2.0, size=n), k, tolerance)
        worst = max(worst, report.log_R - report.log_bound)
        if not report.holds:
            violations += 1
    return violations, worst


def iter_partitions(cases: int, partitions: int) -> Iterator[tuple[int, int]]:
    base, extra = divmod(cases, partitions)
    for p in range(partitions):
        size = base + (1 if p < extra else 0)
        if size:
            yield p, size


def stress_check(
    cases: int,
    seed: int = 42,
    n_max: int = 5000,
    partitions: int = 8,
    workers: int = 1,
    tolerance: float = DEFAULT_TOLERANCE,
) -> StressResult:
    """Randomized audit: returns uniform on (-0.9, 2.0), k on [0, 0.5), n on [1, n_max].

    Each partition draws from its own SeedSequence([seed, p]), so the
    outcome does not depend on the worker count.
    """
    if cases < 1:
        raise ArgumentError(f"cases must be >= 1, got {cases}")
    if partitions < 1 or workers < 1:
        raise ArgumentError("partitions and workers must be >= 1")

    jobs = list(iter_partitions(cases, partitions))
    if workers == 1:
        outcomes = [_stress_partition(seed, p, size, n_max, tolerance) for p, size in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_stress_partition, seed, p, size, n_max, tolerance)
                for p, size in jobs
            ]
            outcomes = [f.result() for f in futures]

    violations = sum(v for v, _ in outcomes)
    worst = max(w for _, w in outcomes)
    logger.info(f"Stress audit: {cases} cases, {violations} violations")
    return StressResult(cases=cases, violations=violations, max_log_excess=worst, seed=seed)
