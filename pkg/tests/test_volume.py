import logging
import math
import random
from fractions import Fraction
from unittest.mock import patch

import numpy as np
import pytest

from src import volume
from src.asymptotics import estimate_volume
from src.errors import CapacityError, DomainError, InsufficientDataError, IntegralityError
from src.logreal import LogReal
from src.schemas import DiagonalSpec, DilationSchedule, MatrixCount, MCConfig, VolumeEntry, VolumeSequence
from src.volume import (
    dilation_schedule,
    ehrhart_volume,
    extrapolate,
    free_coordinate_chart,
    lattice_volume_sequence,
    mc_volume,
    mc_volume_ratio,
    polytope_dimension,
    solve_determined,
)

HALF4 = DiagonalSpec.of([Fraction(1, 2)] * 4)
ZERO4 = DiagonalSpec.of([0] * 4)


def test_dimension_and_chart():
    """N=4 leaves two free pairs; every chart has N determined pairs."""
    assert polytope_dimension(3) == 0
    assert polytope_dimension(7) == 14
    chart = free_coordinate_chart(4)
    assert chart.free_pairs == ((1, 3), (2, 3))
    assert len(chart.determined_pairs) == 4
    assert len(free_coordinate_chart(7).free_pairs) == 14


def test_dilation_schedule():
    assert dilation_schedule(HALF4, 3).denominators == (2, 4, 6)
    assert dilation_schedule(DiagonalSpec.of([Fraction(1, 3)] * 4), 2).denominators == (3, 6)
    assert dilation_schedule(HALF4, 2, step=4).denominators == (4, 8)
    with pytest.raises(IntegralityError):
        dilation_schedule(HALF4, 2, step=3)


# --- Lattice dilation ---


def test_lattice_sequence_n4():
    """Scaled counts (s+1)(s+2)/2 / m^2 with s = m/2."""
    seq = lattice_volume_sequence(HALF4, DilationSchedule(denominators=(2, 4, 6, 8)))
    assert [e.raw_count.value for e in seq.entries] == [3, 6, 10, 15]
    expected = [3 / 4, 6 / 16, 10 / 36, 15 / 64]
    assert [e.scaled.to_float() for e in seq.entries] == pytest.approx(expected)
    assert not seq.truncated


def test_spread_decreases_with_m():
    seq = lattice_volume_sequence(HALF4, DilationSchedule(denominators=(2, 4, 6, 8)))
    spreads = []
    for k in range(2, 5):
        prefix = seq.model_copy(update={"entries": seq.entries[:k]})
        spreads.append(extrapolate(prefix)[1])
    assert spreads == sorted(spreads, reverse=True)
    assert spreads[-1] == pytest.approx(abs(1 - (10 / 36) / (15 / 64)))


def test_spread_decreases_with_m_n5():
    """Uniform h = 1/2 on N=5; m runs over multiples of 4 so every total is even."""
    ds = DiagonalSpec.of([Fraction(1, 2)] * 5)
    seq = lattice_volume_sequence(ds, DilationSchedule(denominators=(4, 8, 12, 16)))
    assert seq.entries[0].raw_count.value == 22
    spreads = []
    for k in range(2, 5):
        prefix = seq.model_copy(update={"entries": seq.entries[:k]})
        spreads.append(extrapolate(prefix)[1])
    assert spreads == sorted(spreads, reverse=True)


def test_lattice_requires_integral_row_sums():
    with pytest.raises(IntegralityError):
        lattice_volume_sequence(HALF4, DilationSchedule(denominators=(2, 3)))


def test_lattice_sequence_truncates_on_budget():
    seq = lattice_volume_sequence(HALF4, DilationSchedule(denominators=(2, 4, 6, 8)), cell_budget=256)
    assert seq.truncated
    assert [e.m for e in seq.entries] == [2, 4, 6]


def test_three_rows_degenerate_to_indicator():
    """N=3 has a single point at most: scaled equals the raw 0/1 count."""
    ds = DiagonalSpec.of([Fraction(1, 2)] * 3)
    seq = lattice_volume_sequence(ds, DilationSchedule(denominators=(2, 4)))
    assert [e.raw_count.value for e in seq.entries] == [0, 1]
    assert seq.entries[1].scaled.to_float() == 1.0
    with pytest.raises(InsufficientDataError):
        extrapolate(seq)


def test_constant_sequence_has_zero_spread():
    entry = lambda m: VolumeEntry(m=m, raw_count=MatrixCount(value=m * m), scaled=LogReal.from_value(1))
    seq = VolumeSequence(n=4, entries=(entry(1), entry(2)))
    value, spread = extrapolate(seq)
    assert value.to_float() == pytest.approx(1.0)
    assert spread == 0.0


def test_ehrhart_volume_n4():
    """Half diagonal: area 1/8; zero diagonal: the triangle of area 1/2."""
    assert ehrhart_volume(HALF4) == Fraction(1, 8)
    assert ehrhart_volume(ZERO4) == Fraction(1, 2)


def test_ehrhart_volume_scales_with_dimension():
    """Uniform diagonals on N=5 scale as (1-h)^5."""
    half = ehrhart_volume(DiagonalSpec.of([Fraction(1, 2)] * 5))
    zero = ehrhart_volume(DiagonalSpec.of([0] * 5))
    assert half > 0
    assert half / zero == Fraction(1, 32)


def test_ehrhart_volume_degenerate_cases():
    assert ehrhart_volume(DiagonalSpec.of([Fraction(1, 2)] * 3)) == 1
    with pytest.raises(CapacityError):
        ehrhart_volume(HALF4, cell_budget=10)


# --- Chart solve ---


def test_solve_center_point():
    b = solve_determined([1 / 3, 1 / 3], ZERO4)
    off = b[~np.eye(4, dtype=bool)]
    assert off == pytest.approx([1 / 3] * 12)


def test_solve_zero_free_values():
    b = solve_determined([0.0, 0.0], ZERO4)
    assert b[1, 2] == pytest.approx(1.0)
    assert b[0, 1] == pytest.approx(0.0)
    assert b[0, 2] == pytest.approx(0.0)
    assert b[0, 3] == pytest.approx(1.0)


def test_solve_infeasible():
    assert solve_determined([0.9, 0.9], ZERO4) is None


def test_solved_matrices_are_stochastic():
    """Row sums including the diagonal equal 1 and the matrix is symmetric."""
    rng = random.Random(11)
    ds = DiagonalSpec.of([Fraction(1, 5), Fraction(1, 10), Fraction(3, 10), 0, Fraction(1, 2)])
    chart = free_coordinate_chart(5)
    found = 0
    for _ in range(2000):
        free = [rng.uniform(0, 0.5) for _ in chart.free_pairs]
        b = solve_determined(free, ds, chart)
        if b is None:
            continue
        found += 1
        assert np.allclose(b.sum(axis=1), 1.0, atol=1e-12)
        assert np.array_equal(b, b.T)
    assert found > 0


def test_vectorized_feasibility_matches_solve():
    ds = DiagonalSpec.of([Fraction(1, 5)] * 5)
    chart = free_coordinate_chart(5)
    geometry = volume._ChartGeometry(ds, chart)
    x = np.random.default_rng(3).random((400, len(chart.free_pairs))) * 0.6
    mask = geometry.feasible(x)
    expected = [solve_determined(row, ds, chart) is not None for row in x]
    assert mask.tolist() == expected


# --- Monte Carlo ---


def test_mc_seed_determinism():
    cfg = MCConfig(samples=20_000, seed=42)
    assert mc_volume(HALF4, cfg) == mc_volume(HALF4, cfg)


def test_mc_independent_of_worker_count():
    one = mc_volume(HALF4, MCConfig(samples=150_000, seed=5, workers=1))
    three = mc_volume(HALF4, MCConfig(samples=150_000, seed=5, workers=3))
    assert one.hits == three.hits


def test_mc_triangle_area():
    est = mc_volume(ZERO4, MCConfig(samples=100_000, seed=1))
    assert est.box_volume == 1.0
    assert abs(est.estimate - 0.5) < 3 * est.stderr


def test_mc_single_hit_is_box_volume():
    with patch.object(volume._ChartGeometry, "feasible", lambda self, x: np.ones(len(x), dtype=bool)):
        est = mc_volume(HALF4, MCConfig(samples=1, seed=0))
    assert est.estimate == est.box_volume == 0.25
    assert est.stderr == 0.0


def test_mc_stderr_scales_with_samples():
    """Doubling the samples shrinks the standard error by sqrt 2."""
    small = mc_volume(ZERO4, MCConfig(samples=100_000, seed=6))
    large = mc_volume(ZERO4, MCConfig(samples=200_000, seed=6))
    assert small.stderr / large.stderr == pytest.approx(math.sqrt(2), rel=1e-2)


def test_mc_without_hits_warns(caplog):
    with patch.object(volume._ChartGeometry, "feasible", lambda self, x: np.zeros(len(x), dtype=bool)):
        with caplog.at_level(logging.WARNING, logger="symstoch.volume"):
            est = mc_volume(HALF4, MCConfig(samples=1_000, seed=0))
    assert est.hits == 0
    assert est.estimate == est.stderr == 0.0
    assert "No hits" in caplog.text


def test_mc_needs_four_rows():
    with pytest.raises(DomainError):
        mc_volume(DiagonalSpec.of([0, 0, 0]), MCConfig(samples=10, seed=0))


def test_mc_matches_ehrhart_n4():
    est = mc_volume(HALF4, MCConfig(samples=200_000, seed=9))
    assert abs(est.estimate - 0.125) < 3 * est.stderr


def test_ratio_of_identical_diagonals():
    r = mc_volume_ratio(HALF4, HALF4, MCConfig(samples=10_000, seed=3))
    assert r.ratio == 1.0
    assert r.stderr == pytest.approx(0.0, abs=1e-6)


def test_ratio_tracks_uniform_scaling():
    """Uniform h = 0.2 against 0.25 on N=5: (0.8/0.75)^5, matching the volume formula."""
    ds1 = DiagonalSpec.of([Fraction(1, 5)] * 5)
    ds2 = DiagonalSpec.of([Fraction(1, 4)] * 5)
    r = mc_volume_ratio(ds1, ds2, MCConfig(samples=200_000, seed=17))
    expected = (estimate_volume(ds1) / estimate_volume(ds2)).to_float()
    assert expected == pytest.approx((0.8 / 0.75) ** 5)
    assert abs(r.ratio - expected) < 3 * r.stderr


def test_ratio_errors():
    cfg = MCConfig(samples=5_000, seed=2)
    with pytest.raises(DomainError):
        mc_volume_ratio(HALF4, DiagonalSpec.of([Fraction(1, 2)] * 5), cfg)
    degenerate = DiagonalSpec.of([1, 1, 1, Fraction(9, 10)])
    with pytest.raises(InsufficientDataError):
        mc_volume_ratio(HALF4, degenerate, cfg)


@pytest.mark.slow
@pytest.mark.parametrize("n", [4, 5])
def test_mc_matches_ehrhart_with_many_samples(n):
    """Monte Carlo with a million samples against the exact lattice volume."""
    ds = DiagonalSpec.of([Fraction(1, 2)] * n)
    exact = float(ehrhart_volume(ds))
    est = mc_volume(ds, MCConfig(samples=1_000_000, seed=2024, workers=4))
    assert abs(est.estimate - exact) < 3 * est.stderr


@pytest.mark.slow
def test_n7_lattice_values_decrease_toward_formula():
    """For N=7, h=1/5 the scaled lattice values fall with m and stay above the formula."""
    ds = DiagonalSpec.of([Fraction(1, 5)] * 7)
    seq = lattice_volume_sequence(ds, DilationSchedule(denominators=(5, 10)))
    first, second = (e.scaled for e in seq.entries)
    assert second < first
    assert estimate_volume(ds) < second
