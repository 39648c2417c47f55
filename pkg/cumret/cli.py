"""Command line interface for cumret."""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import typer
from pydantic import ValidationError

from .config import DEFAULT_RULES, Config, IndicatorConfig, RunConfig, load_config
from .errors import ArgumentError, DataValidationError
from .ids import new_run_id
from .logging_setup import get_logger, reset_logging, setup_logging
from .version import __version__

app = typer.Typer(
    name="cumret",
    help="Cost-adjusted cumulative returns, bound audits and bootstrap backtests "
    "of technical trading rules",
    no_args_is_help=True,
)

# Config command group
config_app = typer.Typer(help="Configuration management commands")
app.add_typer(config_app, name="config")

logger = get_logger("cli")


@dataclass
class GlobalOptions:
    config: Config
    seed: int
    k: float
    out_dir: str
    format: str
    run_id: str


class AuditFailure(Exception):
    """An internal upper-bound audit found violations."""


def _options(ctx: typer.Context) -> GlobalOptions:
    if ctx.obj is None:
        ctx.obj = _build_options(None, None, None, None, None)
    return ctx.obj


def _build_options(config_path, seed, k, out, fmt) -> GlobalOptions:
    config = load_config(Path(config_path) if config_path else None)
    return GlobalOptions(
        config=config,
        seed=config.seed if seed is None else seed,
        k=config.backtest.k if k is None else k,
        out_dir=out or config.output.out_dir,
        format=fmt or config.output.format,
        run_id=new_run_id(),
    )


@app.callback()
def main(
    ctx: typer.Context,
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed (default 42)"),
    k: Optional[float] = typer.Option(
        None, "--k", help="Transaction cost rate per round trip (default 0.003)"
    ),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    fmt: Optional[str] = typer.Option(None, "--format", help="Plot data format (csv|json)"),
    config_path: Optional[str] = typer.Option(None, "--config", help="Path to cumret.yaml"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Console log level"),
    zero_mom_threshold: bool = typer.Option(
        False, "--zero-mom-threshold", help="Use MOM threshold 0 (never fires)"
    ),
) -> None:
    """Global options shared by every command."""
    options = _build_options(config_path, seed, k, out, fmt)
    if zero_mom_threshold:
        options.config.indicators = options.config.indicators.model_copy(
            update={"zero_mom_threshold": True}
        )

    logging_config = options.config.logging
    reset_logging()
    setup_logging(
        console_level=log_level or logging_config.console_level,
        file_level=logging_config.file_level,
        run_id=options.run_id,
        log_dir=Path(logging_config.log_dir) if logging_config.log_dir else None,
    )
    ctx.obj = options


def _fail(e: Exception) -> None:
    typer.echo(f"Error: {e}", err=True)
    raise typer.Exit(1) from e


def _run_config(ctx: typer.Context, command: str, **fields: Any) -> RunConfig:
    options = _options(ctx)
    values = {
        "command": command,
        "seed": options.seed,
        "k": options.k,
        "out_dir": options.out_dir,
        "format": options.format,
    }
    values.update({key: value for key, value in fields.items() if value is not None})
    try:
        return RunConfig(**values)
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        raise ArgumentError(messages) from e


def _load_series(ctx: typer.Context, run: RunConfig):
    """Load and validate every data file; fatal findings abort the command.

    Input digests land in run.data_sha256 and from there in artifact metadata.
    """
    from .hashutil import hash_file
    from .marketdata import load_ohlcv, validate

    config = _options(ctx).config
    loaded = []
    for raw in run.data:
        path = config.resolve_data_path(raw)
        series = load_ohlcv(path)
        report = validate(series)
        for warning in report.warnings:
            logger.warning(f"{series.symbol}: {warning}")
        if not report.ok:
            raise DataValidationError(report.fatal_errors)
        run.data_sha256.append(hash_file(path))
        loaded.append(series)
    return loaded


def _parse_rules(text: str) -> list[str]:
    from .signals import get_rule

    if text.strip().upper() == "ALL":
        return list(DEFAULT_RULES)
    names = [name.strip().upper() for name in text.split(",") if name.strip()]
    for name in names:
        get_rule(name)
    return names


def _parse_window(text: Optional[str]) -> Optional[tuple[int, int]]:
    if text is None:
        return None
    try:
        enter, exit = (int(part) for part in text.split(":"))
    except ValueError as e:
        raise ArgumentError(f"window must look like ENTER:EXIT, got {text!r}") from e
    return enter, exit


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ArgumentError(f"expected comma-separated numbers, got {text!r}") from e


def _file_token(name: str) -> str:
    """Series name as a file-name token ('+DI' -> 'plusDI')."""
    return name.replace("+", "plus").replace("-", "minus")


def _indicator_config(ctx: typer.Context) -> IndicatorConfig:
    return _options(ctx).config.indicators


@app.command()
def version() -> None:
    """Show version information."""
    typer.echo(f"cumret {__version__}")


@app.command("list-rules")
def list_rules() -> None:
    """List the trading rules and their default parameters."""
    from .signals import RULE_NAMES, get_rule

    for name in RULE_NAMES:
        rule = get_rule(name)
        params = f"n={rule.params.n}" + (f",m={rule.params.m}" if rule.params.m else "")
        kind = "random" if rule.is_random else "crossover"
        typer.echo(f"rule={name},{params},kind={kind}")


@app.command()
def ingest(
    ctx: typer.Context,
    data: list[str] = typer.Option(..., "--data", help="Yahoo-Finance daily CSV file(s)"),
) -> None:
    """Parse and validate OHLCV files, printing one JSON report per file."""
    from .marketdata import ValidationReport, load_ohlcv, validate
    from .report import dumps_json_line

    try:
        run = _run_config(ctx, "ingest", data=data)
        config = _options(ctx).config
        fatal = False
        for raw in run.data:
            path = config.resolve_data_path(raw)
            try:
                report = validate(load_ohlcv(path))
            except DataValidationError as e:
                report = ValidationReport(symbol=Path(raw).stem, bar_count=0, fatal_errors=e.errors)
            except (OSError, UnicodeDecodeError) as e:
                logger.error(f"Cannot read {path}: {e}")
                report = ValidationReport(
                    symbol=Path(raw).stem, bar_count=0, fatal_errors=[f"cannot read {path}: {e}"]
                )
            fatal = fatal or not report.ok
            typer.echo(dumps_json_line(report.to_dict()))
    except Exception as e:
        _fail(e)
    if fatal:
        raise typer.Exit(1)


@app.command()
def synth(
    ctx: typer.Context,
    bars: int = typer.Option(2000, "--bars", help="Number of daily bars"),
    symbol: str = typer.Option("SYNTH", "--symbol", help="Symbol and file stem"),
    start_price: float = typer.Option(100.0, "--start-price", help="Opening price"),
    drift: float = typer.Option(0.0003, "--drift", help="Mean daily log return"),
    volatility: float = typer.Option(0.01, "--volatility", help="Daily log-return volatility"),
    flat: bool = typer.Option(False, "--flat", help="Constant prices instead of a random walk"),
    output: Optional[str] = typer.Option(None, "--output", help="CSV path (default OUT/SYMBOL.csv)"),
) -> None:
    """Write a synthetic OHLCV fixture in Yahoo-Finance layout."""
    from .marketdata import constant_series, emit_ohlcv, synthetic_walk
    from .report import ensure_out_dir, write_text

    try:
        run = _run_config(ctx, "synth")
        if flat:
            series = constant_series(bars, start_price, symbol=symbol)
        else:
            rng = np.random.default_rng(run.seed)
            series = synthetic_walk(
                rng, bars, start_price, drift, volatility, symbol=symbol
            )
        path = Path(output) if output else ensure_out_dir(run.out_dir) / f"{symbol}.csv"
        digest = write_text(path, emit_ohlcv(series))
        typer.echo(f"path={path},bars={len(series)},sha256={digest}")
    except Exception as e:
        _fail(e)


@app.command()
def indicators(
    ctx: typer.Context,
    data: str = typer.Option(..., "--data", help="Yahoo-Finance daily CSV file"),
    rule: str = typer.Option(..., "--rule", help="Rule whose indicators to emit"),
) -> None:
    """Emit the indicator series a rule consults, one date,value,defined file per series."""
    from .report import ensure_out_dir, write_rows
    from .signals import get_rule

    try:
        run = _run_config(ctx, "indicators", data=[data], rules=[rule])
        (series,) = _load_series(ctx, run)
        spec = get_rule(rule, _indicator_config(ctx))
        bundle = spec.indicators(series, _indicator_config(ctx))
        out_dir = ensure_out_dir(run.out_dir)
        for name, values in bundle.items():
            rows = [
                {
                    "date": date,
                    "value": float(values.values[t]) if values.is_defined(t) else None,
                    "defined": values.is_defined(t),
                }
                for t, date in enumerate(series.dates)
            ]
            path = write_rows(
                out_dir, f"indicators_{spec.name}_{_file_token(name)}_{series.symbol}", rows,
                ["date", "value", "defined"], run.metadata(), run.format,
            )
            typer.echo(f"path={path}")
    except Exception as e:
        _fail(e)


@app.command()
def signals(
    ctx: typer.Context,
    data: str = typer.Option(..., "--data", help="Yahoo-Finance daily CSV file"),
    rule: str = typer.Option(..., "--rule", help="Rule name (see list-rules)"),
) -> None:
    """Emit the raw Buy/Sell stream of a rule as date,kind rows."""
    from .report import ensure_out_dir, write_rows
    from .signals import generate_signals, get_rule, random_signals_from_config

    try:
        run = _run_config(ctx, "signals", data=[data], rules=[rule])
        (series,) = _load_series(ctx, run)
        options = _options(ctx)
        spec = get_rule(rule, options.config.indicators)
        if spec.is_random:
            rng = np.random.default_rng(run.seed)
            stream = random_signals_from_config(rng, len(series), options.config.random_strategy)
        else:
            stream = generate_signals(spec, series, options.config.indicators)
        dates = series.dates
        rows = [{"date": dates[e.index], "kind": e.kind.value} for e in stream]
        path = write_rows(
            ensure_out_dir(run.out_dir), f"signals_{spec.name}_{series.symbol}", rows,
            ["date", "kind"], run.metadata(), run.format,
        )
        typer.echo(f"path={path},events={len(stream)}")
    except Exception as e:
        _fail(e)


@app.command()
def backtest(
    ctx: typer.Context,
    data: str = typer.Option(..., "--data", help="Yahoo-Finance daily CSV file"),
    rule: str = typer.Option(..., "--rule", help="Rule name (see list-rules)"),
    window: Optional[str] = typer.Option(
        None, "--window", help="ENTER:EXIT bar indices (default: whole series)"
    ),
) -> None:
    """Backtest one rule on one window; writes a JSON result and a trades CSV."""
    from .backtest import run_backtest
    from .boundcheck import check_bound
    from .report import ensure_out_dir, write_csv, write_json
    from .signals import get_rule

    try:
        run = _run_config(ctx, "backtest", data=[data], rules=[rule])
        (series,) = _load_series(ctx, run)
        options = _options(ctx)
        spec = get_rule(rule, options.config.indicators)
        result = run_backtest(
            spec,
            series,
            _parse_window(window),
            run.k,
            np.random.default_rng(run.seed),
            indicator_config=options.config.indicators,
            random_config=options.config.random_strategy,
            bars_per_year=options.config.backtest.bars_per_year,
        )
        audit = check_bound(result.returns, run.k)

        out_dir = ensure_out_dir(run.out_dir)
        stem = f"backtest_{spec.name}_{series.symbol}"
        payload = result.to_dict()
        payload["bound"] = audit.to_dict()
        write_json(out_dir / f"{stem}.json", payload, run.metadata())
        trade_fields = ["buy_index", "sell_index", "buy_price", "sell_price", "forced", "return"]
        write_csv(
            out_dir / f"trades_{spec.name}_{series.symbol}.csv",
            [t.to_dict() for t in result.trades],
            trade_fields,
            run.metadata(),
        )
        typer.echo(
            f"rule={spec.name},n={result.n},R={result.R!r},cagr={result.cagr!r},"
            f"cmv={result.market_cagr!r}"
        )
        if not audit.holds:
            raise AuditFailure(f"cumulative return {audit.R!r} exceeds bound {audit.bound!r}")
    except Exception as e:
        _fail(e)


@app.command()
def bound(
    ctx: typer.Context,
    stress: Optional[int] = typer.Option(None, "--stress", help="Run N randomized audit cases"),
    curve: bool = typer.Option(False, "--curve", help="Emit n,R,bound,envelope curves"),
    k: Optional[float] = typer.Option(None, "--k", help="Cost rate for --curve"),
    rbar: float = typer.Option(0.0048, "--rbar", help="Target mean trade return for --curve"),
    nmax: int = typer.Option(2000, "--nmax", help="Trades in the curve / max n for --stress"),
    noise: float = typer.Option(
        0.0, "--noise", help="Half-width of antithetic return noise (0: deterministic)"
    ),
    workers: int = typer.Option(1, "--workers", help="Processes for --stress"),
) -> None:
    """Audit the upper bound on cumulative return, or emit its decay curves."""
    from .boundcheck import decay_curve, stress_check
    from .report import dumps_json_line, ensure_out_dir, write_rows

    try:
        if (stress is None) == (not curve):
            raise ArgumentError("choose exactly one of --stress or --curve")
        run = _run_config(ctx, "bound", k=k)

        if stress is not None:
            result = stress_check(stress, run.seed, n_max=nmax, workers=workers)
            typer.echo(
                dumps_json_line(
                    {"cases": result.cases, "violations": result.violations, "seed": result.seed,
                     "max_log_excess": result.max_log_excess}
                )
            )
            if not result.ok:
                raise AuditFailure(f"{result.violations} of {result.cases} cases exceed the bound")
            return

        rng = np.random.default_rng(run.seed) if noise > 0 else None
        points = decay_curve(run.k, rbar, nmax, rng=rng, dispersion=noise)
        rows = [
            {"n": p.n, "R": p.R, "bound": p.bound, "envelope": "" if np.isnan(p.envelope) else p.envelope}
            for p in points
        ]
        meta = run.metadata() | {"rbar": rbar, "nmax": nmax}
        path = write_rows(
            ensure_out_dir(run.out_dir), "bound_curve", rows, ["n", "R", "bound", "envelope"],
            meta, run.format,
        )
        violations = sum(1 for p in points if p.R > p.bound * (1 + 1e-9))
        typer.echo(f"path={path},points={len(points)},violations={violations}")
        if violations:
            raise AuditFailure(f"{violations} curve points exceed the bound")
    except Exception as e:
        _fail(e)


@app.command()
def bootstrap(
    ctx: typer.Context,
    data: list[str] = typer.Option(..., "--data", help="Index CSV file(s); symbol = file stem"),
    rules: str = typer.Option("ALL", "--rules", help="ALL or comma-separated rule names"),
    m: Optional[int] = typer.Option(None, "--M", help="Replicas per (rule, index)"),
    min_window: Optional[int] = typer.Option(None, "--min-window", help="Minimum window bars"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker processes"),
    with_reference: bool = typer.Option(
        True, "--with-reference/--no-reference", help="Attach published values"
    ),
) -> None:
    """Random-window bootstrap; writes the r_bar and CAGR matrices, box data and a JSON summary."""
    from .bootstrap import QUANTILE_NAMES, run_bootstrap, summarize_tables
    from .reference import load_reference_tables
    from .report import ensure_out_dir, write_json, write_rows

    try:
        names = _parse_rules(rules)
        options = _options(ctx)
        base = options.config.bootstrap
        run = _run_config(ctx, "bootstrap", data=data, rules=names, M=m or base.M)
        bootstrap_config = base.model_copy(
            update={
                "M": run.M,
                "k": run.k,
                "seed": run.seed,
                "rules": names,
                "min_window": min_window or base.min_window,
                "workers": workers or base.workers,
            }
        )
        all_series = _load_series(ctx, run)

        summaries: dict[str, dict] = {}
        for name in names:
            summaries[name] = {}
            for series in all_series:
                summaries[name][series.symbol] = run_bootstrap(
                    bootstrap_config, series, name,
                    options.config.indicators, options.config.random_strategy,
                )

        reference = load_reference_tables() if with_reference else None
        tables = summarize_tables(summaries, reference)
        meta = run.metadata() | {"min_window": bootstrap_config.min_window}
        out_dir = ensure_out_dir(run.out_dir)
        fields = tables.table_fieldnames(reference is not None)
        write_rows(out_dir, "r_bar_matrix", tables.r_bar_matrix, fields, meta, run.format)
        write_rows(out_dir, "cagr_matrix", tables.cagr_matrix, fields, meta, run.format)
        write_rows(
            out_dir, "cagr_boxdata", tables.boxdata, ["rule", "index", *QUANTILE_NAMES],
            meta, run.format,
        )
        write_rows(
            out_dir, "comparison", tables.comparison,
            ["index", "cmv", "rules", "rules_below_cmv", "rules_beating_rnd", "positive_cagr_rules"],
            meta, run.format,
        )
        replica_rows = [
            {"rule": s.rule, "index": s.symbol, **r.to_dict()}
            for per_index in summaries.values()
            for s in per_index.values()
            for r in s.replicas
        ]
        write_rows(
            out_dir, "replicas", replica_rows,
            ["rule", "index", "i", "enter", "exit", "n", "r_bar", "R", "cagr", "cmv",
             "sum_returns", "bound_holds"],
            meta, run.format,
        )
        write_json(
            out_dir / "summary.json",
            {
                rule: {index: s.to_dict() for index, s in per_index.items()}
                for rule, per_index in summaries.items()
            },
            meta,
        )

        violations = sum(s.bound_violations for p in summaries.values() for s in p.values())
        typer.echo(
            f"out={out_dir},rules={len(names)},indices={len(all_series)},M={run.M},"
            f"bound_violations={violations}"
        )
        if violations:
            raise AuditFailure(f"{violations} replicas exceed the bound")
    except Exception as e:
        _fail(e)


@app.command("sweep-k")
def sweep_k_command(
    ctx: typer.Context,
    data: str = typer.Option(..., "--data", help="Index CSV file"),
    rules: str = typer.Option("ALL", "--rules", help="ALL or comma-separated rule names"),
    k_grid: str = typer.Option("0.001:0.01:0.001", "--k-grid", help="LO:HI:STEP"),
    m: Optional[int] = typer.Option(None, "--M", help="Replicas per (rule, k)"),
    min_window: Optional[int] = typer.Option(None, "--min-window", help="Minimum window bars"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker processes"),
) -> None:
    """Bootstrap mean R across a grid of cost rates (rule,k,mean_R rows)."""
    from .report import ensure_out_dir, write_rows
    from .sweeps import sweep_k

    try:
        names = _parse_rules(rules)
        grid = tuple(float(part) for part in k_grid.split(":"))
        if len(grid) != 3:
            raise ArgumentError(f"k grid must look like LO:HI:STEP, got {k_grid!r}")
        options = _options(ctx)
        base = options.config.bootstrap
        run = _run_config(ctx, "sweep-k", data=[data], rules=names, M=m or base.M)
        (series,) = _load_series(ctx, run)
        bootstrap_config = base.model_copy(
            update={
                "M": run.M,
                "seed": run.seed,
                "min_window": min_window or base.min_window,
                "workers": workers or base.workers,
            }
        )
        rows = sweep_k(
            names, series, grid, bootstrap_config,
            options.config.indicators, options.config.random_strategy,
        )
        meta = run.metadata() | {"k_grid": k_grid.replace(":", "/")}
        meta.pop("k")
        path = write_rows(
            ensure_out_dir(run.out_dir), "sweep_k", rows, ["rule", "k", "mean_R", "mean_n"],
            meta, run.format,
        )
        typer.echo(f"path={path},rows={len(rows)}")
    except Exception as e:
        _fail(e)


@app.command("sweep-n")
def sweep_n_command(
    ctx: typer.Context,
    data: str = typer.Option(..., "--data", help="Index CSV file"),
    rule: str = typer.Option("RND", "--rule", help="Rule name"),
    k_list: str = typer.Option("0.001,0.003,0.005,0.007", "--k-list", help="Comma-separated k"),
    nmax: int = typer.Option(500, "--nmax", help="Maximum trade count"),
) -> None:
    """Running R and bound as trades accumulate (k,n,R,bound rows)."""
    from .report import ensure_out_dir, write_rows
    from .sweeps import sweep_n

    try:
        ks = _parse_floats(k_list)
        run = _run_config(ctx, "sweep-n", data=[data], rules=[rule.upper()])
        (series,) = _load_series(ctx, run)
        options = _options(ctx)
        report = sweep_n(
            rule, series, ks, nmax, run.seed,
            options.config.indicators, options.config.random_strategy,
        )
        meta = run.metadata() | {"k_list": "/".join(str(k) for k in ks)}
        meta.pop("k")
        path = write_rows(
            ensure_out_dir(run.out_dir), "sweep_n", report.rows, ["k", "n", "R", "bound"],
            meta, run.format,
        )
        typer.echo(f"path={path},rows={len(report.rows)},violations={report.violations}")
        if not report.ok:
            raise AuditFailure(f"{report.violations} rows exceed the bound")
    except Exception as e:
        _fail(e)


@app.command()
def reference(
    ctx: typer.Context,
    table: Optional[str] = typer.Option(None, "--table", help="r_bar, cagr or cmv"),
    rule: Optional[str] = typer.Option(None, "--rule", help="Rule name (with --table and --index)"),
    index: Optional[str] = typer.Option(None, "--index", help="Index name (DJIA, FTSE, N225, SCI)"),
) -> None:
    """Print the bundled published tables, or one cell of them."""
    from .reference import load_reference_tables
    from .report import render_csv

    try:
        tables = load_reference_tables()
        if rule is not None or index is not None:
            if table is None or index is None:
                raise ArgumentError("a single lookup needs --table, --index and --rule")
            value = tables.lookup(table, rule or "CMV", index)
            typer.echo(f"{value:.4f}")
            return

        for name in [table] if table else ["r_bar", "cagr"]:
            rows = tables.rows(name)
            typer.echo(f"# table={name},checksum={tables.checksum}")
            typer.echo(render_csv(rows, ["rule", *tables.indices]), nl=False)
    except Exception as e:
        _fail(e)


@config_app.command("show")
def config_show(ctx: typer.Context) -> None:
    """Show the effective configuration."""
    try:
        typer.echo(_options(ctx).config.to_yaml())
    except Exception as e:
        typer.echo(f"Error loading configuration: {e}", err=True)
        raise typer.Exit(1) from e


@config_app.command("path")
def config_path() -> None:
    """Show the absolute path to the configuration file."""
    typer.echo(str(Config.get_config_path()))


@config_app.command("init")
def config_init(
    force: bool = typer.Option(False, "--force", help="Overwrite an existing file"),
) -> None:
    """Write the default configuration to the configuration path."""
    path = Config.get_config_path()
    if path.exists() and not force:
        typer.echo(f"Error: {path} already exists (use --force)", err=True)
        raise typer.Exit(1)
    Config().save_to_yaml_file(path)
    typer.echo(str(path))


if __name__ == "__main__":
    app()
