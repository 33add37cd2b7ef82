from fractions import Fraction

import pytest
from pydantic import ValidationError

from src.schemas import (
    CountCacheEntry,
    DiagonalSpec,
    DilationSchedule,
    FreeCoordinateChart,
    MCConfig,
    ReportRow,
    RowSums,
)


def test_row_sums_length_must_match():
    with pytest.raises(ValidationError):
        RowSums(n=3, t=(1, 1))


def test_row_sums_nonnegative():
    with pytest.raises(ValidationError):
        RowSums.of((2, -1, 1))


def test_row_sums_canonical():
    rs = RowSums.of((4, 1, 3))
    assert rs.x == 8
    assert rs.canonical().t == (1, 3, 4)


def test_diagonal_spec_reads_rationals():
    """Strings, floats and Fractions all become exact rationals."""
    ds = DiagonalSpec.of(["1/2", 0.1, Fraction(1, 3), 0])
    assert ds.h == (Fraction(1, 2), Fraction(1, 10), Fraction(1, 3), Fraction(0))
    assert ds.slack[0] == Fraction(1, 2)
    assert ds.chi == Fraction(1, 2) + Fraction(1, 10) + Fraction(1, 3)


def test_diagonal_spec_bounds():
    with pytest.raises(ValidationError):
        DiagonalSpec.of([1.5, 0, 0, 0])
    with pytest.raises(ValidationError):
        DiagonalSpec.of([1, 1, 1])  # chi == N


def test_dilation_schedule_increasing():
    assert DilationSchedule(denominators=(2, 4, 6)).denominators == (2, 4, 6)
    with pytest.raises(ValidationError):
        DilationSchedule(denominators=(4, 2))
    with pytest.raises(ValidationError):
        DilationSchedule(denominators=())


def test_chart_must_partition_pairs():
    with pytest.raises(ValidationError):
        FreeCoordinateChart(n=4, free_pairs=((1, 3),), determined_pairs=((0, 1), (0, 2), (0, 3), (1, 2)))


def test_mc_config_needs_samples():
    with pytest.raises(ValidationError):
        MCConfig(samples=0, seed=1)
    with pytest.raises(ValidationError):
        MCConfig(samples=10, seed=-1)


def test_cache_entry_validation():
    entry = CountCacheEntry(n=3, t_sorted=[0, 1, 1], count="1", engine_version="v")
    assert entry.key == (3, (0, 1, 1), "v")
    with pytest.raises(ValidationError):
        CountCacheEntry(n=3, t_sorted=[1, 0, 1], count="1", engine_version="v")
    with pytest.raises(ValidationError):
        CountCacheEntry(n=3, t_sorted=[0, 1, 1], count="-1", engine_version="v")
    with pytest.raises(ValidationError):
        CountCacheEntry(n=2, t_sorted=[0, 1, 1], count="1", engine_version="v")


def test_cache_entry_keeps_unknown_fields():
    entry = CountCacheEntry.model_validate(
        {"n": 2, "t_sorted": [1, 1], "count": "1", "engine_version": "v", "note": "hand"}
    )
    assert entry.model_dump()["note"] == "hand"


def test_report_row_ratio_needs_exact():
    with pytest.raises(ValidationError):
        ReportRow(n=3, t_or_h="1,1,0", ratio=1.0)
    with pytest.raises(ValidationError):
        ReportRow(n=3, t_or_h="1,1,0", exact="0", ratio=1.0)


def test_report_row_csv_record():
    """Ratios to three decimals, missing estimates as n/a, flags lowercase."""
    row = ReportRow(
        n=7,
        t_or_h="8,8,8,8,8,8,8",
        exact="54199966",
        exact_sci="5.42E7",
        ratio=0.92812,
        y2=0.0,
        y3=-6.0,
        y4=20.0,
        max_validity_ratio=0.25,
        in_window=True,
    )
    record = row.csv_record()
    assert record["ratio"] == "0.928"
    assert record["estimate_sci"] == "n/a"
    assert record["y3"] == "-6"
    assert record["max_validity_ratio"] == "0.25"
    assert record["in_window"] == "true"
