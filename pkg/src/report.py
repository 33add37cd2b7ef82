"""
Builders for the report rows and sweeps printed by the CLI.

Each builder returns pydantic rows; writing them out as CSV or JSON is left
to write_csv / write_json so the same rows back both formats.
"""

import csv
import json
import logging
from fractions import Fraction
from typing import IO, Any, Iterable, Literal, Optional, Sequence

from .asymptotics import (
    coverage_fraction,
    diagonal_validity,
    estimate_count,
    estimate_volume,
    lower_bound,
    moments,
    qualitative_criterion,
    validity_check,
    volume_prefactor,
)
from .cache import CountCache
from .config import DATA_DIR, DEFAULT_ALPHA, DEFAULT_CELL_BUDGET, DEFAULT_OMEGA, DEFAULT_TABLE2_MAX_N
from .enumeration import count_matrices
from .errors import CapacityError
from .logreal import LogReal, format_scientific
from .parser import load_golden_rows
from .schemas import DiagonalSpec, DilationSchedule, FigurePoint, MCConfig, MatrixCount, ReportRow, RowSums, as_fraction
from .volume import (
    dilation_schedule,
    ehrhart_volume,
    extrapolate,
    lattice_volume_sequence,
    mc_volume,
    polytope_dimension,
)

logger = logging.getLogger("symstoch.report")

REPORT_COLUMNS = [
    "n",
    "t_or_h",
    "exact",
    "exact_sci",
    "estimate_sci",
    "ratio",
    "y2",
    "y3",
    "y4",
    "max_validity_ratio",
    "in_window",
]
FIGURE_COLUMNS = ["x", "formula_volume", "mc_estimate", "mc_stderr"]

FigureName = Literal["fig1", "fig2a", "fig2b"]
FIGURE_NAMES = ("fig1", "fig2a", "fig2b")
FIG1_SIZES = range(4, 10)
FIG2_SIZE = 5


def _join(values: Iterable) -> str:
    return ",".join(str(v) for v in values)


# --- Counting rows ---


def _estimate_columns(rs: RowSums, omega: float) -> tuple[Optional[LogReal], dict[str, Any]]:
    validity = validity_check(rs, omega)
    columns: dict[str, Any] = {
        "max_validity_ratio": validity.max_ratio,
        "in_window": validity.in_window,
    }
    if rs.n < 3:
        return None, columns
    m = moments(rs)
    columns.update(y2=float(m.y2), y3=float(m.y3), y4=float(m.y4))
    if m.lam == 0:
        return None, columns
    estimate = estimate_count(rs)
    columns["estimate_sci"] = estimate.to_scientific()
    return estimate, columns


def count_row(
    rs: RowSums,
    cache: Optional[CountCache] = None,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    omega: float = DEFAULT_OMEGA,
    exact: bool = True,
) -> tuple[ReportRow, bool]:
    """
    Exact count (cache first), estimate, ratio, moments and validity for one row.

    Returns the row and whether the exact count was refused by the cell budget;
    a refused row still carries the estimate.
    """
    estimate, columns = _estimate_columns(rs, omega)
    count: Optional[MatrixCount] = None
    refused = False
    if exact:
        count = cache.get(rs) if cache is not None else None
        if count is None:
            try:
                count = count_matrices(rs, cell_budget=cell_budget)
            except CapacityError:
                refused = True
            else:
                if cache is not None:
                    cache.put(rs, count)
    if count is not None:
        columns["exact"] = str(count.value)
        columns["exact_sci"] = format_scientific(count.value)
        if estimate is not None and count.value > 0:
            columns["ratio"] = (estimate / LogReal.from_value(count.value)).to_float()
    return ReportRow(n=rs.n, t_or_h=_join(rs.t), **columns), refused


def table1_rows(
    cache: Optional[CountCache] = None,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    omega: float = DEFAULT_OMEGA,
) -> list[ReportRow]:
    rows = []
    for golden in load_golden_rows(DATA_DIR / "table1.csv"):
        row, _ = count_row(golden.row_sums, cache, cell_budget, omega)
        rows.append(row)
    logger.info("Built %d rows of the N=7 table", len(rows))
    return rows


def table2_rows(
    max_n: int = DEFAULT_TABLE2_MAX_N,
    cache: Optional[CountCache] = None,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    omega: float = DEFAULT_OMEGA,
) -> list[ReportRow]:
    """Equal-row-sum table; exact counts only up to max_n, estimates for every row."""
    rows = []
    for golden in load_golden_rows(DATA_DIR / "table2.csv"):
        row, refused = count_row(golden.row_sums, cache, cell_budget, omega, exact=golden.n <= max_n)
        if refused:
            logger.warning("Exact count for N=%d refused by the cell budget", golden.n)
        rows.append(row)
    logger.info("Built %d rows of the equal-row-sum table (exact up to N=%d)", len(rows), max_n)
    return rows


def estimate_summary(rs: RowSums, omega: float = DEFAULT_OMEGA, alpha: float = DEFAULT_ALPHA) -> dict[str, Any]:
    """Formula value with its moments, validity, coverage and the lower bound at lam_j = lam."""
    m = moments(rs)
    lam = float(m.lam)
    validity = validity_check(rs, omega)
    summary: dict[str, Any] = {
        "n": rs.n,
        "t": _join(rs.t),
        "lam": lam,
        "y2": float(m.y2),
        "y3": float(m.y3),
        "y4": float(m.y4),
        "estimate_sci": None,
        "log10_estimate": None,
        "coverage_fraction": None,
        "lower_bound_sci": None,
        "max_validity_ratio": validity.max_ratio,
        "omega_in_window": validity.omega_in_window,
        "in_window": validity.in_window,
    }
    if lam > 0:
        estimate = estimate_count(rs)
        summary.update(
            estimate_sci=estimate.to_scientific(),
            log10_estimate=float(estimate.log10()),
            coverage_fraction=coverage_fraction(lam),
            lower_bound_sci=lower_bound(rs, alpha, [lam] * rs.n).to_scientific(),
        )
    return summary


# --- Volumes ---


def volume_summary(
    ds: DiagonalSpec,
    samples: int,
    seed: int,
    omega: float = DEFAULT_OMEGA,
    dilations: Optional[Sequence[int]] = None,
    ehrhart: bool = False,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    dilation_count: int = 0,
) -> dict[str, Any]:
    """Formula, Monte Carlo and (on request) lattice volumes for one diagonal."""
    validity = diagonal_validity(ds, omega)
    summary: dict[str, Any] = {
        "n": ds.n,
        "h": _join(ds.h),
        "dimension": polytope_dimension(ds.n),
        "formula_volume": None,
        "prefactor": volume_prefactor(ds.n, ds.chi).to_float(),
        "qualitative_criterion": qualitative_criterion(ds),
        "max_validity_ratio": validity.max_ratio,
        "in_window": validity.in_window,
    }
    if ds.n >= 4:
        summary["formula_volume"] = estimate_volume(ds).to_float()
        if samples > 0:
            mc = mc_volume(ds, MCConfig(samples=samples, seed=seed))
            summary.update(mc_estimate=mc.estimate, mc_stderr=mc.stderr)
    sched = None
    if dilations:
        sched = DilationSchedule(denominators=tuple(sorted(set(dilations))))
    elif dilation_count:
        sched = dilation_schedule(ds, dilation_count)
    if sched is not None:
        seq = lattice_volume_sequence(ds, sched, cell_budget)
        summary["lattice_scaled"] = ";".join(f"{e.m}:{e.scaled.to_float()!r}" for e in seq.entries)
        summary["lattice_truncated"] = seq.truncated
        if sum(1 for e in seq.entries if e.raw_count.value > 0) >= 2:
            value, spread = extrapolate(seq)
            summary.update(lattice_estimate=value.to_float(), lattice_spread=spread)
    if ehrhart:
        summary["ehrhart_volume"] = str(ehrhart_volume(ds, cell_budget))
    return summary


# --- Figures ---


def _figure_domain(name: FigureName) -> tuple[Fraction, Fraction]:
    if name == "fig2b":
        return Fraction(0), Fraction(1, 3)
    return Fraction(0), Fraction(1)


def figure_diagonal(name: FigureName, n: int, x) -> DiagonalSpec:
    """The diagonal swept by a figure at parameter x."""
    x = as_fraction(x)
    half = Fraction(1, 2)
    if name == "fig1":
        h = (half,) * (n - 2) + (x, 1 - x)
    elif name == "fig2a":
        h = (x,) * n
    elif name == "fig2b":
        h = (half, x, x, x, 1 - 3 * x)
    else:
        raise ValueError(f"unknown figure {name!r}")
    return DiagonalSpec.of(h)


def figure_grid(name: FigureName, grid: int, x_min=None, x_max=None) -> list[Fraction]:
    lo, hi = _figure_domain(name)
    if x_min is not None:
        lo = max(lo, as_fraction(x_min))
    if x_max is not None:
        hi = min(hi, as_fraction(x_max))
    if lo > hi or grid < 1:
        return []
    if grid == 1:
        return [lo]
    return [lo + (hi - lo) * i / (grid - 1) for i in range(grid)]


def figure_points(
    name: FigureName,
    n: int,
    grid: int,
    samples: int,
    seed: int,
    x_min=None,
    x_max=None,
    workers: int = 1,
) -> list[FigurePoint]:
    """Formula and Monte Carlo volumes along a figure's sweep."""
    if name == "fig1" and n not in FIG1_SIZES:
        raise ValueError(f"fig1 needs 4 <= N <= 9, got {n}")
    if name != "fig1" and n != FIG2_SIZE:
        raise ValueError(f"{name} is drawn for N={FIG2_SIZE}, got {n}")
    xs = figure_grid(name, grid, x_min, x_max)
    if not xs:
        logger.warning("Sweep range for %s is empty; writing header only", name)
        return []
    cfg = MCConfig(samples=samples, seed=seed, workers=workers)
    points = []
    for x in xs:
        try:
            ds = figure_diagonal(name, n, x)
        except ValueError:
            # diagonal sums to N at the edge of the sweep
            logger.debug("Skipping x=%s for %s", x, name)
            continue
        mc = mc_volume(ds, cfg)
        points.append(
            FigurePoint(
                x=float(x),
                formula_volume=estimate_volume(ds).to_float(),
                mc_estimate=mc.estimate,
                mc_stderr=mc.stderr,
            )
        )
    logger.info("Computed %d points of %s for N=%d", len(points), name, n)
    return points


# --- Writers ---


def write_csv(records: Sequence[dict[str, Any]], columns: Sequence[str], stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for record in records:
        writer.writerow(record)


def write_json(records: Sequence[dict[str, Any]], stream: IO[str]) -> None:
    json.dump(list(records), stream, indent=2, default=str)
    stream.write("\n")
