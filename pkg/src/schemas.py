from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .logreal import LogReal


def as_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, decimal/ratio string or float (via its repr)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not diagonal entries")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as a rational")


# --- Exact enumeration ---


class RowSums(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    t: tuple[int, ...]

    @field_validator("t")
    @classmethod
    def _nonnegative(cls, t: tuple[int, ...]) -> tuple[int, ...]:
        if any(v < 0 for v in t):
            raise ValueError("row sums must be nonnegative")
        return t

    @model_validator(mode="after")
    def _length_matches(self) -> "RowSums":
        if len(self.t) != self.n:
            raise ValueError(f"expected {self.n} row sums, got {len(self.t)}")
        return self

    @classmethod
    def of(cls, t: Sequence[int]) -> "RowSums":
        return cls(n=len(t), t=tuple(t))

    @property
    def x(self) -> int:
        return sum(self.t)

    def canonical(self) -> "RowSums":
        """Ascending row sums; counts do not depend on row order."""
        return RowSums(n=self.n, t=tuple(sorted(self.t)))


class MatrixCount(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: int = Field(ge=0)

    def __int__(self) -> int:
        return self.value


# --- Asymptotic formulas ---


class MomentSummary(BaseModel):
    """lam = x/(N(N-1)); y_k = sum_j (t_j - lam(N-1))**k, kept exact."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(ge=3)
    x: int = Field(ge=0)
    lam: Fraction
    eps: tuple[float, ...]
    y2: Fraction
    y3: Fraction
    y4: Fraction

    @model_validator(mode="after")
    def _check(self) -> "MomentSummary":
        if self.lam != Fraction(self.x, self.n * (self.n - 1)):
            raise ValueError("lam must equal x/(N(N-1))")
        if self.y2 < 0 or self.y4 < 0:
            raise ValueError("even power sums must be nonnegative")
        scale = max((abs(e) for e in self.eps), default=0.0)
        if abs(math.fsum(self.eps)) > 1e-9 * scale * self.n:
            raise ValueError("centered deviations must sum to zero")
        return self


class DiagonalSpec(BaseModel):
    """Prescribed diagonal h of a symmetric stochastic matrix, held exactly."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(ge=2)
    h: tuple[Fraction, ...]

    @field_validator("h", mode="before")
    @classmethod
    def _exact(cls, h) -> tuple[Fraction, ...]:
        return tuple(as_fraction(v) for v in h)

    @field_validator("h")
    @classmethod
    def _unit_interval(cls, h: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
        if any(v < 0 or v > 1 for v in h):
            raise ValueError("diagonal entries must lie in [0, 1]")
        return h

    @model_validator(mode="after")
    def _check(self) -> "DiagonalSpec":
        if len(self.h) != self.n:
            raise ValueError(f"expected {self.n} diagonal entries, got {len(self.h)}")
        if self.chi >= self.n:
            raise ValueError("sum of the diagonal must be below N")
        return self

    @classmethod
    def of(cls, h: Sequence) -> "DiagonalSpec":
        return cls(n=len(h), h=tuple(h))

    @property
    def chi(self) -> Fraction:
        return sum(self.h, Fraction(0))

    @property
    def h_float(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.h)

    @property
    def slack(self) -> tuple[Fraction, ...]:
        """Off-diagonal row sums s_j = 1 - h_j."""
        return tuple(1 - v for v in self.h)


class CoefficientSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    argument: float = Field(gt=0)
    a1: float
    a2: float
    a3: float
    a4: float
    b1: float
    c1: float
    b2: float
    c2: float
    d2: float


class ValidityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega: float
    per_row_ratio: tuple[float, ...]
    max_ratio: float
    threshold: float
    omega_window: tuple[float, float]
    omega_in_window: bool
    rows_satisfied: bool
    in_window: bool
    lambda_log_n: Optional[float] = None

    @model_validator(mode="after")
    def _max_matches(self) -> "ValidityReport":
        if self.per_row_ratio and self.max_ratio != max(self.per_row_ratio):
            raise ValueError("max_ratio must be the largest per-row ratio")
        return self


# --- Volume estimation ---


class DilationSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    denominators: tuple[int, ...] = Field(min_length=1)

    @field_validator("denominators")
    @classmethod
    def _increasing(cls, ms: tuple[int, ...]) -> tuple[int, ...]:
        if ms[0] < 1 or any(b <= a for a, b in zip(ms, ms[1:])):
            raise ValueError("denominators must be positive and strictly increasing")
        return ms


class VolumeEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1)
    raw_count: MatrixCount
    scaled: LogReal


class VolumeSequence(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    entries: tuple[VolumeEntry, ...]
    truncated: bool = False


class FreeCoordinateChart(BaseModel):
    """
    Coordinates for the N(N-3)/2-dimensional slice: row 1 and pair (2,3) are
    solved for, the remaining pairs are free. Pairs are 0-based.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=3)
    free_pairs: tuple[tuple[int, int], ...]
    determined_pairs: tuple[tuple[int, int], ...]

    @model_validator(mode="after")
    def _partition(self) -> "FreeCoordinateChart":
        free, determined = set(self.free_pairs), set(self.determined_pairs)
        everything = {(k, l) for k in range(self.n) for l in range(k + 1, self.n)}
        if free & determined or free | determined != everything:
            raise ValueError("free and determined pairs must partition all pairs")
        if len(self.determined_pairs) != self.n:
            raise ValueError("exactly N pairs are determined")
        return self


class MCConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    samples: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)
    box_margin: float = Field(default=1.0, ge=1.0)
    workers: int = Field(default=1, ge=1)


class MCEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    estimate: float
    stderr: float
    hits: int
    samples: int
    box_volume: float


class MCRatio(BaseModel):
    model_config = ConfigDict(frozen=True)

    ratio: float
    stderr: float
    hits_numerator: int
    hits_denominator: int
    samples: int


# --- Reports and cache ---


class CountCacheEntry(BaseModel):
    model_config = ConfigDict(extra="allow")

    n: int = Field(ge=2)
    t_sorted: list[int]
    count: str
    engine_version: str

    @field_validator("t_sorted")
    @classmethod
    def _ascending(cls, t: list[int]) -> list[int]:
        if t != sorted(t) or any(v < 0 for v in t):
            raise ValueError("t_sorted must be nonnegative and ascending")
        return t

    @field_validator("count")
    @classmethod
    def _decimal(cls, count: str) -> str:
        if not (count.isascii() and count.isdigit()):
            raise ValueError("count must be a nonnegative decimal integer")
        return count

    @model_validator(mode="after")
    def _length(self) -> "CountCacheEntry":
        if len(self.t_sorted) != self.n:
            raise ValueError("t_sorted must have n entries")
        return self

    @property
    def key(self) -> tuple[int, tuple[int, ...], str]:
        return (self.n, tuple(self.t_sorted), self.engine_version)


class ReportRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    t_or_h: str
    exact: Optional[str] = None
    exact_sci: Optional[str] = None
    estimate_sci: Optional[str] = None
    ratio: Optional[float] = None
    y2: Optional[float] = None
    y3: Optional[float] = None
    y4: Optional[float] = None
    max_validity_ratio: Optional[float] = None
    in_window: Optional[bool] = None

    @model_validator(mode="after")
    def _ratio_needs_exact(self) -> "ReportRow":
        if self.ratio is not None and (self.exact is None or int(self.exact) == 0):
            raise ValueError("ratio is only defined against a nonzero exact count")
        return self

    def csv_record(self) -> dict[str, str]:
        def num(value: Optional[float]) -> str:
            if value is None:
                return ""
            return str(int(value)) if float(value).is_integer() else f"{value:.6g}"

        return {
            "n": str(self.n),
            "t_or_h": self.t_or_h,
            "exact": self.exact or "",
            "exact_sci": self.exact_sci or "",
            "estimate_sci": self.estimate_sci or "n/a",
            "ratio": "" if self.ratio is None else f"{self.ratio:.3f}",
            "y2": num(self.y2),
            "y3": num(self.y3),
            "y4": num(self.y4),
            "max_validity_ratio": num(self.max_validity_ratio),
            "in_window": "" if self.in_window is None else str(self.in_window).lower(),
        }


class FigurePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float
    formula_volume: Optional[float]
    mc_estimate: float
    mc_stderr: float

    def csv_record(self) -> dict[str, str]:
        return {
            "x": repr(self.x),
            "formula_volume": "" if self.formula_volume is None else repr(self.formula_volume),
            "mc_estimate": repr(self.mc_estimate),
            "mc_stderr": repr(self.mc_stderr),
        }


class GoldenRow(BaseModel):
    """One printed row of a reference table."""

    model_config = ConfigDict(frozen=True)

    n: int
    t: tuple[int, ...]
    exact_sci: str
    estimate_sci: str
    ratio: float
    lam: Optional[float] = None
    y2: Optional[int] = None
    y3: Optional[int] = None
    y4: Optional[int] = None

    @property
    def row_sums(self) -> RowSums:
        return RowSums(n=self.n, t=self.t)
