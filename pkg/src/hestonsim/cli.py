"""Command-line interface for pricing runs, experiments and table
maintenance."""

from __future__ import annotations

import csv
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Optional,
    Tuple,
    Union,
)

import click
import numpy as np
import structlog
import uvicorn
from pydantic import ValidationError
from safir.logging import configure_logging
from scipy import stats
from structlog.stdlib import BoundLogger

from .components import sample_s_series
from .config import config
from .engine import HestonEngine
from .exceptions import (
    ConvergenceError,
    CorruptedTableError,
    InternalConsistencyError,
    InvalidArgumentError,
    InversionFailureError,
    MissingTableError,
    NumericFailureError,
    RunawayRejectionError,
    TableParseError,
)
from .models import CASES, PricingReport, RunConfig, Scheme
from .oracle import quantile_function, regenerate_table, statistical_check
from .sampling import RngStream
from .tables import TableSet, audit_table, dump_table, validation_report

__all__ = ["main", "help", "run"]

CONTEXT_SETTINGS = dict(help_option_names=["-h", "--help"])

PRICE_COLUMNS = [
    "scheme",
    "case",
    "strike",
    "estimate",
    "std_error",
    "n_paths",
    "K",
    "proposals_mean",
    "seconds",
]

MOMENT_COLUMNS = [
    "case",
    "v_t",
    "K",
    "order",
    "sample_moment",
    "exact_moment",
    "abs_error",
    "three_se",
    "significant",
]

_ORACLE_LIMIT = 50
"""Tables with a parameter at most this large can be checked by the
oracle."""

_ERRORS = (
    ConvergenceError,
    CorruptedTableError,
    InternalConsistencyError,
    InvalidArgumentError,
    InversionFailureError,
    MissingTableError,
    NumericFailureError,
    RunawayRejectionError,
    TableParseError,
    ValidationError,
)


@contextmanager
def _errors() -> Iterator[None]:
    """Report library errors as one-line command failures."""
    try:
        yield
    except _ERRORS as e:
        raise click.ClickException(f"{type(e).__name__}: {e}")


def _logger() -> BoundLogger:
    return structlog.get_logger(config.logger_name)


def _load_tables(tables_dir: Optional[str]) -> TableSet:
    if tables_dir:
        config.tables_dir = tables_dir
    return TableSet.from_directory(config.tables_dir)


def _write_csv(
    rows: Iterable[Dict[str, Any]], columns: List[str], output: Optional[str]
) -> None:
    if not output:
        writer = csv.DictWriter(sys.stdout, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
        return
    with open(output, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


@click.group(context_settings=CONTEXT_SETTINGS)
@click.version_option(message="%(version)s")
@click.pass_context
def main(ctx: click.Context) -> None:
    """hestonsim

    Exact simulation and Monte Carlo pricing in the Heston model.
    """
    configure_logging(
        profile=config.profile,
        log_level=config.log_level,
        name=config.logger_name,
        add_timestamp=True,
    )
    ctx.obj = {}


@main.command()
@click.argument("topic", default=None, required=False, nargs=1)
@click.pass_context
def help(ctx: click.Context, topic: Union[None, str], **kw: Any) -> None:
    """Show help for any command."""
    if topic:
        if topic in main.commands:
            ctx.info_name = topic
            click.echo(main.commands[topic].get_help(ctx))
        else:
            raise click.UsageError(f"Unknown help topic {topic}", ctx)
    else:
        assert ctx.parent
        click.echo(ctx.parent.get_help())


@main.command()
@click.option(
    "--port",
    "-p",
    default=8080,
    type=int,
    help="Port to run the application on.",
)
def run(port: int) -> None:
    """Run the pricing service."""
    uvicorn.run("hestonsim.main:app", host="0.0.0.0", port=port)


def _run_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Options shared by every pricing command."""
    options = [
        click.option(
            "--config",
            "config_file",
            type=click.Path(exists=True, dir_okay=False),
            help="YAML file of run settings.",
        ),
        click.option(
            "--case", type=click.Choice(sorted(CASES)), help="Named case."
        ),
        click.option("--kappa", type=float),
        click.option("--theta", type=float),
        click.option("--sigma", type=float),
        click.option("--rho", type=float),
        click.option("--t", "t", type=float, help="Horizon in years."),
        click.option("--v0", type=float),
        click.option("--s0", type=float),
        click.option("--r", "r", type=float, help="Risk-free rate."),
        click.option(
            "--scheme",
            type=click.Choice([s.value for s in Scheme]),
            help="Simulation scheme.",
        ),
        click.option("-K", "K", type=int, help="Truncation level."),
        click.option("--n-paths", type=int, help="Number of paths."),
        click.option(
            "--steps", type=int, help="Euler steps (default sqrt(n_paths))."
        ),
        click.option("--seed", type=int, help="Random seed."),
        click.option(
            "--tables-dir",
            type=click.Path(exists=True, file_okay=False),
            help="Directory of inverse CDF tables.",
        ),
        click.option(
            "--output", "-o", type=click.Path(), help="CSV output file."
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run_config(
    config_file: Optional[str], overrides: Dict[str, Any]
) -> RunConfig:
    base = RunConfig.from_file(config_file) if config_file else RunConfig()
    if overrides.get("scheme") is not None:
        overrides["scheme"] = Scheme(overrides["scheme"])
    return base.merged(overrides)


def _default_case(settings: RunConfig, case: str) -> RunConfig:
    if settings.case is None and settings.kappa is None:
        return settings.merged({"case": case})
    return settings


def _emit(report: PricingReport, output: Optional[str]) -> None:
    _write_csv([report.csv_row()], PRICE_COLUMNS, output)


@main.group()
def price() -> None:
    """Price an option by Monte Carlo."""


@price.command()
@_run_options
@click.option("--strike", type=float, help="Strike (default 100).")
def european(config_file: Optional[str], **kwargs: Any) -> None:
    """Price a European call."""
    with _errors():
        settings = _default_case(_run_config(config_file, kwargs), "case1")
        engine = HestonEngine(_load_tables(settings.tables_dir), _logger())
        report = engine.price_european_call(
            settings.params(),
            settings.strike,
            settings.n_paths,
            scheme=settings.scheme,
            K=settings.K,
            seed=settings.seed,
            steps=settings.steps,
            case=settings.case,
        )
        _emit(report, settings.output)


@price.command()
@_run_options
@click.option("--strike", type=float, help="Strike (default 100).")
@click.option("--n-fixings", type=int, help="Fixings (default yearly).")
def asian(config_file: Optional[str], **kwargs: Any) -> None:
    """Price an arithmetic-average Asian call."""
    with _errors():
        settings = _default_case(_run_config(config_file, kwargs), "asian")
        engine = HestonEngine(_load_tables(settings.tables_dir), _logger())
        report = engine.price_asian_call(
            settings.params(),
            settings.strike,
            settings.n_fixings,
            settings.n_paths,
            scheme=settings.scheme,
            K=settings.K,
            seed=settings.seed,
            steps=settings.steps,
            case=settings.case,
        )
        _emit(report, settings.output)


@price.command()
@_run_options
@click.option("--lower", type=float, help="Lower barrier (default 90).")
@click.option("--upper", type=float, help="Upper barrier (default 110).")
@click.option("--steps-per-year", type=int, help="Monitoring dates a year.")
def barrier(config_file: Optional[str], **kwargs: Any) -> None:
    """Price a digital double no-touch option."""
    with _errors():
        settings = _default_case(_run_config(config_file, kwargs), "barrier")
        engine = HestonEngine(_load_tables(settings.tables_dir), _logger())
        report = engine.price_double_no_touch(
            settings.params(),
            settings.lower,
            settings.upper,
            settings.steps_per_year,
            settings.n_paths,
            scheme=settings.scheme,
            K=settings.K,
            seed=settings.seed,
            steps=settings.steps,
            case=settings.case,
        )
        _emit(report, settings.output)


@main.command()
@_run_options
@click.option(
    "--v-t",
    "v_t",
    type=float,
    multiple=True,
    help="End variance; may be repeated.",
)
@click.option(
    "--k-value",
    "K_values",
    type=int,
    multiple=True,
    help="Truncation level to compare; may be repeated.",
)
def moments(config_file: Optional[str], **kwargs: Any) -> None:
    """Compare sample and exact moments of the conditional integral."""
    for key in ("v_t", "K_values"):
        kwargs[key] = list(kwargs[key]) or None
    with _errors():
        settings = _default_case(_run_config(config_file, kwargs), "case1")
        engine = HestonEngine(_load_tables(settings.tables_dir), _logger())
        report = engine.moment_error_report(
            settings.params(),
            settings.v_t,
            settings.K_values,
            settings.n_paths,
            seed=settings.seed,
            scheme=settings.scheme,
            case=settings.case or "",
        )
        _write_csv(
            (row.csv_row() for row in report.rows),
            MOMENT_COLUMNS,
            settings.output,
        )
        click.echo(
            f"X2 mean {report.x2_mean:.10g},"
            f" with rounded h {report.x2_mean_rounded:.10g}",
            err=True,
        )


@main.group()
def tables() -> None:
    """Inspect and maintain the inverse CDF tables."""


@tables.command()
@click.option(
    "--tables-dir",
    type=click.Path(exists=True, file_okay=False),
    help="Directory of inverse CDF tables.",
)
@click.option(
    "--oracle/--no-oracle",
    default=False,
    help="Also compare small-P tables with the oracle quantile.",
)
@click.option("--grid-size", default=200, type=int, help="Oracle grid.")
def validate(tables_dir: Optional[str], oracle: bool, grid_size: int) -> None:
    """Audit every table and report per-regime errors."""
    with _errors():
        for table in _load_tables(tables_dir):
            audit = audit_table(table, strict=False)
            status = "ok" if audit.monotone else "NOT MONOTONE"
            click.echo(
                f"{table.base_id}: {status},"
                f" max seam jump {audit.max_seam_jump:.3g}"
                f" ({audit.worst_seam or '-'})"
            )
            if oracle and table.parameter <= _ORACLE_LIMIT:
                quantile = quantile_function(table.parameter)
                for regime in validation_report(table, quantile, grid_size):
                    click.echo(
                        f"  {regime.label}: {regime.nodes} nodes,"
                        f" {regime.points} points,"
                        f" max error {regime.max_error:.3g}"
                    )


@tables.command()
@click.argument("base_ids", nargs=-1)
@click.option(
    "--tables-dir",
    type=click.Path(exists=True, file_okay=False),
    help="Directory of inverse CDF tables.",
)
@click.option(
    "--write",
    "write_dir",
    type=click.Path(file_okay=False),
    help="Write the refitted tables to this directory.",
)
def regen(
    base_ids: Tuple[str, ...],
    tables_dir: Optional[str],
    write_dir: Optional[str],
) -> None:
    """Refit small-P tables from the oracle.

    With no BASE_IDS, every table with an oracle is refitted.
    """
    with _errors():
        table_set = _load_tables(tables_dir)
        if base_ids:
            selected = [table_set.get(b) for b in base_ids]
        else:
            selected = [
                t for t in table_set if t.parameter <= _ORACLE_LIMIT
            ]
        for table in selected:
            result = regenerate_table(table)
            click.echo(
                f"{table.base_id}: max deviation"
                f" {result.max_deviation:.3g}"
            )
            if write_dir:
                path = Path(write_dir)
                path.mkdir(parents=True, exist_ok=True)
                target = path / f"{table.base_id}.tbl"
                target.write_text(dump_table(result.table))


def _check_oracle(table_set: TableSet, full: bool) -> List[Tuple[str, bool]]:
    ids = [t.base_id for t in table_set if t.parameter <= _ORACLE_LIMIT]
    if not full:
        ids = [i for i in ids if i in ("sp_1", "zprime")]
    results = []
    for base_id in ids:
        table = table_set.get(base_id)
        report = validation_report(
            table, quantile_function(table.parameter), 200
        )
        worst = max(r.max_error for r in report)
        results.append((f"oracle {base_id} ({worst:.2g})", worst <= 1e-9))
    return results


def _check_series(
    table_set: TableSet, full: bool, stream: RngStream
) -> List[Tuple[str, bool]]:
    n = 100_000 if full else 20_000
    n_inner = 10_000 if full else 1_000
    table_draws = np.asarray(
        table_set.sum_table(1).variates(stream.uniforms(n))
    )
    series_draws = sample_s_series(n_inner, stream, n)
    result = stats.ks_2samp(table_draws, series_draws)
    return [(f"series S (p = {result.pvalue:.3f})", result.pvalue > 0.01)]


def _check_large_p(
    table_set: TableSet, full: bool, stream: RngStream
) -> List[Tuple[str, bool]]:
    n = 1_000_000 if full else 100_000
    results = []
    for parameter in (5000, 10_000):
        check = statistical_check(parameter, table_set, stream, n)
        results.append((f"statistics S^{parameter}", check.passed))
    return results


def _check_martingale(
    engine: HestonEngine, full: bool
) -> List[Tuple[str, bool]]:
    n = 1_000_000 if full else 20_000
    report = engine.price_european_call(CASES["case3"], 0.0, n, seed=1)
    s0 = CASES["case3"].s0
    passed = abs(report.estimate - s0) <= 3.0 * report.std_error
    return [(f"martingale case3 ({report.estimate:.4f})", passed)]


@main.command()
@click.option(
    "--full/--quick",
    default=False,
    help="Run the full-size reproductions (slow).",
)
@click.option("--seed", default=0, type=int, help="Random seed.")
@click.option(
    "--tables-dir",
    type=click.Path(exists=True, file_okay=False),
    help="Directory of inverse CDF tables.",
)
def selftest(full: bool, seed: int, tables_dir: Optional[str]) -> None:
    """Check the tables and the engine against independent references."""
    with _errors():
        table_set = _load_tables(tables_dir)
        root = RngStream(seed)
        engine = HestonEngine(table_set, _logger())
        results = _check_oracle(table_set, full)
        results += _check_series(table_set, full, root.split(0))
        results += _check_large_p(table_set, full, root.split(1))
        results += _check_martingale(engine, full)
    failed = 0
    for name, passed in results:
        click.echo(f"{'PASS' if passed else 'FAIL'} {name}")
        failed += not passed
    if failed:
        raise click.ClickException(f"{failed} check(s) failed")
