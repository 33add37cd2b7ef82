import contextlib
import logging
import sys
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

import click

from .cache import CountCache
from .config import (
    CACHE_PATH_ENV,
    DEFAULT_ALPHA,
    DEFAULT_CELL_BUDGET,
    DEFAULT_GRID,
    DEFAULT_MC_SAMPLES,
    DEFAULT_OMEGA,
    DEFAULT_SEED,
    DEFAULT_TABLE2_MAX_N,
    get_cache_path,
)
from .enumeration import cell_count
from .errors import CacheLockedError, CapacityError, InsufficientDataError
from .parser import parse_int_list, parse_rational_list
from .report import (
    FIGURE_COLUMNS,
    FIGURE_NAMES,
    REPORT_COLUMNS,
    count_row,
    estimate_summary,
    figure_points,
    table1_rows,
    table2_rows,
    volume_summary,
    write_csv,
    write_json,
)
from .schemas import DiagonalSpec, ReportRow, RowSums

logger = logging.getLogger("symstoch.cli")


class ResourceRefusal(click.ClickException):
    """A computation was refused for lack of resources (cell budget, cache lock)."""

    exit_code = 3


@contextlib.contextmanager
def _cli_errors() -> Iterator[None]:
    """Map library errors onto the CLI exit codes."""
    try:
        yield
    except (CapacityError, CacheLockedError) as exc:
        logger.error("Refused: %s", exc)
        raise ResourceRefusal(str(exc)) from exc
    except InsufficientDataError as exc:
        raise click.ClickException(str(exc)) from exc
    except ValueError as exc:
        # pydantic ValidationError and the domain errors are ValueErrors
        raise click.UsageError(str(exc)) from exc


def _emit(records: Sequence[dict[str, Any]], columns: Sequence[str], fmt: str) -> None:
    stream = click.get_text_stream("stdout")
    if fmt == "json":
        write_json(records, stream)
    else:
        write_csv(records, columns, stream)


def _emit_rows(rows: Sequence[ReportRow], fmt: str) -> None:
    if fmt == "json":
        _emit([r.model_dump() for r in rows], REPORT_COLUMNS, fmt)
    else:
        _emit([r.csv_record() for r in rows], REPORT_COLUMNS, fmt)


def _row_sums(n: Optional[int], t: str) -> RowSums:
    values = parse_int_list(t)
    if n is not None and len(values) == 1 and n > 1:
        values = values * n
    return RowSums(n=len(values) if n is None else n, t=values)


format_option = click.option(
    "--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True, help="Output format."
)
budget_option = click.option(
    "--cell-budget", type=int, default=DEFAULT_CELL_BUDGET, show_default=True, help="Largest coefficient table allowed."
)
omega_option = click.option(
    "--omega", type=float, default=DEFAULT_OMEGA, show_default=True, help="Exponent of the validity criterion."
)


@click.group()
@click.option(
    "--cache-path",
    type=click.Path(dir_okay=False, path_type=Path),
    envvar=CACHE_PATH_ENV,
    default=None,
    help="Count cache file (line-delimited JSON).",
)
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging.")
@click.pass_context
def cli(ctx: click.Context, cache_path: Optional[Path], verbose: bool) -> None:
    """Counts and volumes of symmetric matrices with prescribed row sums."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )
    ctx.ensure_object(dict)
    ctx.obj["cache_path"] = cache_path or get_cache_path()


@cli.command()
@click.option("--n", "n", type=int, default=None, help="Number of rows (defaults to the length of --t).")
@click.option("--t", "t", required=True, help="Row sums, comma separated; one value repeats for every row.")
@omega_option
@budget_option
@format_option
@click.pass_context
def count(ctx: click.Context, n: Optional[int], t: str, omega: float, cell_budget: int, fmt: str) -> None:
    """Exact count next to the asymptotic estimate."""
    with _cli_errors():
        rs = _row_sums(n, t)
        cache = CountCache(ctx.obj["cache_path"])
        row, refused = count_row(rs, cache, cell_budget, omega)
        _emit_rows([row], fmt)
        cache.save()
        if refused:
            raise CapacityError(cell_count(rs.t), cell_budget)


@cli.command()
@click.option("--n", "n", type=int, default=None, help="Number of rows.")
@click.option("--t", "t", required=True, help="Row sums, comma separated.")
@omega_option
@click.option("--alpha", type=float, default=DEFAULT_ALPHA, show_default=True, help="Exponent of the lower bound.")
@format_option
def estimate(n: Optional[int], t: str, omega: float, alpha: float, fmt: str) -> None:
    """Asymptotic estimate with moments, validity, coverage and lower bound."""
    with _cli_errors():
        summary = estimate_summary(_row_sums(n, t), omega, alpha)
        _emit([summary], list(summary), fmt)


@cli.command()
@click.option("--h", "h", required=True, help="Diagonal entries, comma separated rationals (1/2) or decimals.")
@click.option("--samples", type=int, default=DEFAULT_MC_SAMPLES, show_default=True, help="Monte Carlo samples (0 to skip).")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@omega_option
@click.option("--dilations", default=None, help="Dilation denominators m, comma separated.")
@click.option("--dilation-count", type=int, default=0, help="Use the first k valid denominators.")
@click.option("--ehrhart", is_flag=True, help="Also compute the exact volume from the Ehrhart polynomial.")
@budget_option
@format_option
def volume(
    h: str,
    samples: int,
    seed: int,
    omega: float,
    dilations: Optional[str],
    dilation_count: int,
    ehrhart: bool,
    cell_budget: int,
    fmt: str,
) -> None:
    """Formula, Monte Carlo and lattice volumes for one diagonal."""
    with _cli_errors():
        ds = DiagonalSpec.of(parse_rational_list(h))
        summary = volume_summary(
            ds,
            samples=samples,
            seed=seed,
            omega=omega,
            dilations=parse_int_list(dilations) if dilations else None,
            ehrhart=ehrhart,
            cell_budget=cell_budget,
            dilation_count=dilation_count,
        )
        _emit([summary], list(summary), fmt)


@cli.command()
@omega_option
@budget_option
@format_option
@click.pass_context
def table1(ctx: click.Context, omega: float, cell_budget: int, fmt: str) -> None:
    """Every row of the N=7, x=56 table."""
    with _cli_errors():
        cache = CountCache(ctx.obj["cache_path"])
        _emit_rows(table1_rows(cache, cell_budget, omega), fmt)
        cache.save()


@cli.command()
@click.option("--max-n", type=int, default=DEFAULT_TABLE2_MAX_N, show_default=True, help="Largest N counted exactly.")
@omega_option
@budget_option
@format_option
@click.pass_context
def table2(ctx: click.Context, max_n: int, omega: float, cell_budget: int, fmt: str) -> None:
    """The equal-row-sum table for N = 6..18."""
    with _cli_errors():
        cache = CountCache(ctx.obj["cache_path"])
        _emit_rows(table2_rows(max_n, cache, cell_budget, omega), fmt)
        cache.save()


@cli.command()
@click.argument("name", type=click.Choice(FIGURE_NAMES))
@click.option("--n", "n", type=int, default=5, show_default=True)
@click.option("--grid", type=int, default=DEFAULT_GRID, show_default=True, help="Number of sweep points.")
@click.option("--samples", type=int, default=DEFAULT_MC_SAMPLES, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--x-min", type=str, default=None, help="Lower end of the sweep.")
@click.option("--x-max", type=str, default=None, help="Upper end of the sweep.")
@click.option("--workers", type=int, default=1, show_default=True, help="Monte Carlo threads.")
@format_option
def figure(
    name: str,
    n: int,
    grid: int,
    samples: int,
    seed: int,
    x_min: Optional[str],
    x_max: Optional[str],
    workers: int,
    fmt: str,
) -> None:
    """Formula and Monte Carlo volumes along a sweep of the diagonal."""
    with _cli_errors():
        points = figure_points(name, n, grid, samples, seed, x_min, x_max, workers)
        if fmt == "json":
            _emit([p.model_dump() for p in points], FIGURE_COLUMNS, fmt)
        else:
            _emit([p.csv_record() for p in points], FIGURE_COLUMNS, fmt)


@cli.group()
def cache() -> None:
    """Inspect or clear the count cache."""


@cache.command("list")
@format_option
@click.pass_context
def cache_list(ctx: click.Context, fmt: str) -> None:
    """Print the stored counts."""
    with _cli_errors():
        store = CountCache(ctx.obj["cache_path"])
        records = [
            {
                "n": e.n,
                "t_sorted": ",".join(map(str, e.t_sorted)),
                "count": e.count,
                "engine_version": e.engine_version,
            }
            for _, e in sorted(store.entries.items())
        ]
        _emit(records, ["n", "t_sorted", "count", "engine_version"], fmt)


@cache.command("clear")
@click.pass_context
def cache_clear(ctx: click.Context) -> None:
    """Remove every stored count."""
    with _cli_errors():
        store = CountCache(ctx.obj["cache_path"])
        removed = len(store.entries)
        store.clear()
        click.echo(f"Removed {removed} entries from {store.path}")


def main() -> None:
    cli(obj={})


if __name__ == "__main__":
    main()
