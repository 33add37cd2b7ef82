"""
Volume of the symmetric stochastic matrices with a prescribed diagonal.

Two estimators: lattice dilation on top of the exact counter (with an exact
Ehrhart-polynomial variant), and hit-or-miss Monte Carlo over the free
coordinates of a fixed chart.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_CELL_BUDGET, MC_CHUNK_SIZE
from .enumeration import cell_count, count_matrices
from .errors import CapacityError, DomainError, InsufficientDataError, IntegralityError
from .logreal import LogReal
from .schemas import (
    DiagonalSpec,
    DilationSchedule,
    FreeCoordinateChart,
    MCConfig,
    MCEstimate,
    MCRatio,
    RowSums,
    VolumeEntry,
    VolumeSequence,
)

logger = logging.getLogger("symstoch.volume")

# Integer points of the dilated chart region are exactly the lattice points of
# the dilated slice, so the free-coordinate volume needs no rescaling.
LATTICE_NORMALIZATION = 1.0
ROW_SUM_TOLERANCE = 1e-12


def polytope_dimension(n: int) -> int:
    return n * (n - 3) // 2


# --- Lattice dilation ---


def _base_denominator(ds: DiagonalSpec) -> int:
    return math.lcm(*(s.denominator for s in ds.slack))


def _row_sums_at(ds: DiagonalSpec, m: int) -> RowSums:
    t = []
    for s in ds.slack:
        value = m * s
        if value.denominator != 1:
            raise IntegralityError(f"m={m} does not clear the denominator of 1 - h_j = {s}")
        t.append(int(value))
    return RowSums(n=ds.n, t=tuple(t))


def dilation_schedule(ds: DiagonalSpec, count: int, step: Optional[int] = None) -> DilationSchedule:
    """The first `count` multiples of `step` (default: the smallest valid denominator)."""
    if count < 1:
        raise DomainError(f"need at least one dilation, got {count}")
    base = _base_denominator(ds)
    if step is None:
        step = base
    elif step < 1 or step % base:
        raise IntegralityError(f"step {step} is not a multiple of {base}")
    return DilationSchedule(denominators=tuple(step * i for i in range(1, count + 1)))


def lattice_volume_sequence(
    ds: DiagonalSpec, sched: DilationSchedule, cell_budget: int = DEFAULT_CELL_BUDGET
) -> VolumeSequence:
    """Scaled lattice counts m^-dim * V_N(m(1-h)) for each m of the schedule."""
    targets = [(m, _row_sums_at(ds, m)) for m in sched.denominators]
    dim = polytope_dimension(ds.n)
    entries = []
    truncated = False
    for m, rs in targets:
        try:
            count = count_matrices(rs, cell_budget=cell_budget)
        except CapacityError as exc:
            logger.warning("Truncating dilation sequence at m=%d: %s", m, exc)
            truncated = True
            break
        scaled = LogReal.from_value(count.value) / LogReal.from_value(m) ** dim
        entries.append(VolumeEntry(m=m, raw_count=count, scaled=scaled))
        logger.debug("m=%d count=%d", m, count.value)
    return VolumeSequence(n=ds.n, entries=tuple(entries), truncated=truncated)


def extrapolate(seq: VolumeSequence) -> tuple[LogReal, float]:
    """Last scaled entry and the relative gap to the entry before it."""
    nonzero = [e for e in seq.entries if e.raw_count.value > 0]
    if len(nonzero) < 2:
        raise InsufficientDataError("extrapolation needs two entries with nonzero counts")
    prev, last = nonzero[-2].scaled, nonzero[-1].scaled
    spread = abs(1.0 - (prev / last).to_float())
    return last, spread


def ehrhart_volume(ds: DiagonalSpec, cell_budget: int = DEFAULT_CELL_BUDGET) -> Fraction:
    """
    Exact lattice-normalized volume from the Ehrhart polynomial.

    Vertices of the slice are half-integral once m0 clears the denominators,
    so p(k) = V_N(2 m0 k (1-h)) is a polynomial of degree dim with p(0) = 1;
    its leading coefficient is the d-th forward difference at 0 over d!.
    """
    step = 2 * _base_denominator(ds)
    dim = polytope_dimension(ds.n)
    largest = _row_sums_at(ds, step * max(dim, 1))
    cells = cell_count(largest.t)
    if cells > cell_budget:
        logger.error("Ehrhart volume for h=%s needs %d cells", ds.h, cells)
        raise CapacityError(cells, cell_budget)

    first = count_matrices(_row_sums_at(ds, step), cell_budget).value
    if dim == 0 or first == 0:
        return Fraction(first)
    values = [1, first] + [
        count_matrices(_row_sums_at(ds, step * k), cell_budget).value for k in range(2, dim + 1)
    ]
    difference = sum((-1) ** (dim - i) * math.comb(dim, i) * p for i, p in enumerate(values))
    return Fraction(difference, math.factorial(dim) * step**dim)


# --- Monte Carlo ---


def free_coordinate_chart(n: int) -> FreeCoordinateChart:
    """Row 0 and the pair (1, 2) are solved for; every other pair is free."""
    determined = tuple((0, j) for j in range(1, n)) + ((1, 2),)
    free = tuple(
        (k, l) for k in range(1, n) for l in range(k + 1, n) if (k, l) != (1, 2)
    )
    return FreeCoordinateChart(n=n, free_pairs=free, determined_pairs=determined)


def solve_determined(
    free_values: Sequence[float], ds: DiagonalSpec, chart: Optional[FreeCoordinateChart] = None
) -> Optional[np.ndarray]:
    """Complete the matrix from its free entries; None when a determined entry is negative."""
    chart = chart or free_coordinate_chart(ds.n)
    if len(free_values) != len(chart.free_pairs):
        raise ValueError(f"expected {len(chart.free_pairs)} free values, got {len(free_values)}")
    n = ds.n
    s = np.array([float(v) for v in ds.slack])
    b = np.zeros((n, n))
    for (k, l), v in zip(chart.free_pairs, free_values):
        b[k, l] = b[l, k] = v
    b[1, 2] = b[2, 1] = (s[1:].sum() - s[0]) / 2 - float(np.sum(free_values))
    for j in range(1, n):
        b[0, j] = b[j, 0] = s[j] - b[j, 1:].sum()
    if (b < -ROW_SUM_TOLERANCE).any():
        return None
    np.fill_diagonal(b, ds.h_float)
    return b


class _ChartGeometry:
    """Vectorized form of solve_determined for a batch of free-coordinate samples."""

    def __init__(self, ds: DiagonalSpec, chart: FreeCoordinateChart) -> None:
        self.slack = np.array([float(v) for v in ds.slack])
        self.incidence = np.zeros((len(chart.free_pairs), ds.n))
        for i, (k, l) in enumerate(chart.free_pairs):
            self.incidence[i, k] = self.incidence[i, l] = 1.0
        self.pair_sum = (self.slack[1:].sum() - self.slack[0]) / 2

    def upper_bounds(self, chart: FreeCoordinateChart, margin: float) -> np.ndarray:
        return np.array(
            [min(1.0, margin * min(self.slack[k], self.slack[l])) for k, l in chart.free_pairs]
        )

    def feasible(self, x: np.ndarray) -> np.ndarray:
        b12 = self.pair_sum - x.sum(axis=1)
        row_free = x @ self.incidence
        row_free[:, 1] += b12
        row_free[:, 2] += b12
        first_row = self.slack[1:] - row_free[:, 1:]
        return (b12 >= 0) & (first_row >= 0).all(axis=1)


def _chunk_sizes(samples: int) -> list[int]:
    full, rest = divmod(samples, MC_CHUNK_SIZE)
    return [MC_CHUNK_SIZE] * full + ([rest] if rest else [])


def _hit_counts(
    geometries: Sequence[_ChartGeometry], upper: np.ndarray, cfg: MCConfig
) -> tuple[list[int], int]:
    """Hits per geometry plus joint hits of all geometries, over shared samples."""
    sizes = _chunk_sizes(cfg.samples)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))

    def run(job: tuple[int, np.random.SeedSequence]) -> tuple[list[int], int]:
        size, seed = job
        x = np.random.default_rng(seed).random((size, len(upper))) * upper
        masks = [g.feasible(x) for g in geometries]
        joint = np.logical_and.reduce(masks)
        return [int(m.sum()) for m in masks], int(joint.sum())

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(run, zip(sizes, seeds)))
    hits = [sum(r[0][i] for r in results) for i in range(len(geometries))]
    joint = sum(r[1] for r in results)
    logger.debug("MC over %d chunks: hits=%s joint=%d", len(sizes), hits, joint)
    return hits, joint


def mc_volume(ds: DiagonalSpec, cfg: MCConfig) -> MCEstimate:
    """Hit-or-miss volume estimate over the free-coordinate box."""
    if ds.n < 4:
        raise DomainError(f"Monte Carlo needs N >= 4, got N={ds.n}")
    chart = free_coordinate_chart(ds.n)
    geometry = _ChartGeometry(ds, chart)
    upper = geometry.upper_bounds(chart, cfg.box_margin)
    box_volume = float(np.prod(upper))
    (hits,), _ = _hit_counts([geometry], upper, cfg)
    if hits == 0:
        logger.warning(
            "No hits in %d samples for h=%s; the zero estimate only bounds the volume by the box resolution",
            cfg.samples,
            ds.h_float,
        )
    p = hits / cfg.samples
    scale = box_volume * LATTICE_NORMALIZATION
    return MCEstimate(
        estimate=scale * p,
        stderr=scale * math.sqrt(p * (1 - p) / cfg.samples),
        hits=hits,
        samples=cfg.samples,
        box_volume=box_volume,
    )


def mc_volume_ratio(ds1: DiagonalSpec, ds2: DiagonalSpec, cfg: MCConfig) -> MCRatio:
    """vol(ds1) / vol(ds2) from one set of samples on a box covering both."""
    if ds1.n != ds2.n:
        raise DomainError(f"diagonals differ in size: {ds1.n} vs {ds2.n}")
    if ds1.n < 4:
        raise DomainError(f"Monte Carlo needs N >= 4, got N={ds1.n}")
    chart = free_coordinate_chart(ds1.n)
    g1, g2 = _ChartGeometry(ds1, chart), _ChartGeometry(ds2, chart)
    upper = np.maximum(g1.upper_bounds(chart, cfg.box_margin), g2.upper_bounds(chart, cfg.box_margin))
    (h1, h2), joint = _hit_counts([g1, g2], upper, cfg)
    if h2 == 0:
        raise InsufficientDataError("no samples hit the denominator polytope")
    s = cfg.samples
    p1, p2, p12 = h1 / s, h2 / s, joint / s
    ratio = h1 / h2
    # delta method with the covariance of the shared samples
    variance = (p1 * (1 - p1) + ratio**2 * p2 * (1 - p2) - 2 * ratio * (p12 - p1 * p2)) / (s * p2**2)
    return MCRatio(
        ratio=ratio,
        stderr=math.sqrt(max(variance, 0.0)),
        hits_numerator=h1,
        hits_denominator=h2,
        samples=s,
    )
