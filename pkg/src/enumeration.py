"""
Exact counting of symmetric natural-entry matrices with zero diagonal.

The count V_N(t) is the coefficient of w_1^t_1 ... w_N^t_N in
prod_{k<l} 1/(1 - w_k w_l). It is extracted by multiplying a dense,
truncated power series by one geometric factor per pair.
"""

import itertools
import logging
import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import DEFAULT_CELL_BUDGET
from .errors import CapacityError, DomainError, GuardrailError, ParityError
from .schemas import MatrixCount, RowSums

logger = logging.getLogger("symstoch.enumeration")

BRUTEFORCE_MAX_N = 6
BRUTEFORCE_MAX_TOTAL = 40
_INT64_LIMIT = 2**63


def cell_count(bounds: Sequence[int]) -> int:
    """Number of coefficients in a table with degree caps `bounds`."""
    return math.prod(b + 1 for b in bounds)


def total_matrices(n: int, x: int) -> MatrixCount:
    """All symmetric zero-diagonal natural matrices with entry sum x/2 (stars and bars)."""
    if n < 2:
        raise DomainError(f"need N >= 2, got {n}")
    if x < 0:
        raise DomainError(f"need x >= 0, got {x}")
    if x % 2:
        raise ParityError(f"row sums of a symmetric zero-diagonal matrix total an even number, got {x}")
    pairs = math.comb(n, 2)
    return MatrixCount(value=math.comb(pairs - 1 + x // 2, pairs - 1))


def coefficient_bound(n: int, x: int) -> int:
    """Upper bound for every coefficient of a table whose caps sum to x."""
    return total_matrices(n, x + x % 2).value


class SeriesTable:
    """
    Truncated power series in w_1..w_N stored densely.

    coeffs[d] is the coefficient of w^d for 0 <= d_j <= bounds[j]. Coefficients
    are int64 when coefficient_bound proves they fit, Python ints otherwise.
    """

    def __init__(self, coeffs: np.ndarray, bounds: Sequence[int]) -> None:
        self.coeffs = coeffs
        self.bounds = tuple(bounds)

    @classmethod
    def empty_product(cls, bounds: Sequence[int], cell_budget: int = DEFAULT_CELL_BUDGET) -> "SeriesTable":
        bounds = tuple(bounds)
        cells = cell_count(bounds)
        if cells > cell_budget:
            raise CapacityError(cells, cell_budget)
        fits = coefficient_bound(len(bounds), sum(bounds)) < _INT64_LIMIT
        dtype = np.int64 if fits else object
        logger.debug("Allocating %d cells (%s) for bounds %s", cells, np.dtype(dtype).name, bounds)
        coeffs = np.zeros(tuple(b + 1 for b in bounds), dtype=dtype)
        coeffs[(0,) * len(bounds)] = 1
        return cls(coeffs, bounds)

    @property
    def n(self) -> int:
        return len(self.bounds)

    def __getitem__(self, degree: Sequence[int]) -> int:
        return int(self.coeffs[tuple(degree)])

    def apply_pair_factor(self, k: int, l: int) -> "SeriesTable":
        """
        Multiply in place by 1/(1 - w_k w_l), truncated to the bounds.

        Running sum along e_k + e_l: new[d] = old[d] + new[d - e_k - e_l].
        Slices are visited in increasing d_k so the right-hand side is already new.
        """
        if not 0 <= k < l < self.n:
            raise ValueError(f"need 0 <= k < l < {self.n}, got ({k}, {l})")
        c = self.coeffs
        for i in range(1, self.bounds[k] + 1):
            dst = [slice(None)] * self.n
            src = [slice(None)] * self.n
            dst[k], src[k] = i, i - 1
            dst[l], src[l] = slice(1, None), slice(None, -1)
            c[tuple(dst)] += c[tuple(src)]
        return self


def apply_pair_factor(table: SeriesTable, k: int, l: int) -> SeriesTable:
    return table.apply_pair_factor(k, l)


def all_pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def series_table(
    rs: RowSums,
    pair_order: Optional[Iterable[tuple[int, int]]] = None,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> SeriesTable:
    """Table of prod_{k<l} 1/(1 - w_k w_l) truncated at rs.t, pairs applied in `pair_order`."""
    pairs = all_pairs(rs.n) if pair_order is None else [tuple(p) for p in pair_order]
    if sorted(pairs) != all_pairs(rs.n):
        raise ValueError("pair_order must list every pair k < l exactly once")
    table = SeriesTable.empty_product(rs.t, cell_budget)
    for k, l in pairs:
        table.apply_pair_factor(k, l)
        logger.debug("Applied pair factor (%d, %d)", k, l)
    return table


def count_matrices(rs: RowSums, cell_budget: int = DEFAULT_CELL_BUDGET) -> MatrixCount:
    """Exact number of symmetric zero-diagonal natural matrices with row sums rs.t."""
    if rs.x % 2:
        return MatrixCount(value=0)
    if rs.n == 2:
        return MatrixCount(value=int(rs.t[0] == rs.t[1]))
    if rs.x == 0:
        return MatrixCount(value=1)
    # every entry of a row is shared with another row
    if 2 * max(rs.t) > rs.x:
        return MatrixCount(value=0)
    try:
        table = series_table(rs, cell_budget=cell_budget)
    except CapacityError as exc:
        logger.error("Refusing to count %s: %s", rs.t, exc)
        raise
    count = MatrixCount(value=table[rs.t])
    logger.info("Counted N=%d t=%s: %d", rs.n, rs.t, count.value)
    return count


def count_matrices_bruteforce(rs: RowSums) -> MatrixCount:
    """Enumerate upper-triangular entries with row-residual pruning (small instances only)."""
    if rs.n > BRUTEFORCE_MAX_N or rs.x > BRUTEFORCE_MAX_TOTAL:
        raise GuardrailError(
            f"brute force is limited to N <= {BRUTEFORCE_MAX_N} and sum(t) <= {BRUTEFORCE_MAX_TOTAL}"
        )
    n = rs.n
    pairs = all_pairs(n)
    residual = list(rs.t)

    def place(index: int) -> int:
        if index == len(pairs):
            return int(residual[-1] == 0)
        k, l = pairs[index]
        if l == n - 1:
            # last pair touching row k: its entry is forced
            values: Iterable[int] = (residual[k],) if residual[k] <= residual[l] else ()
        else:
            values = range(min(residual[k], residual[l]) + 1)
        total = 0
        for v in values:
            residual[k] -= v
            residual[l] -= v
            total += place(index + 1)
            residual[k] += v
            residual[l] += v
        return total

    return MatrixCount(value=place(0))
