"""Tests for the direct-inversion samplers of the base variables."""

from __future__ import annotations

import math
from decimal import Decimal

import numpy as np
import pytest
from scipy import stats

from hestonsim.components import (
    decompose_count,
    decompose_h,
    h_denominators,
    round_h,
    sample_c_series,
    sample_s_p,
    sample_s_series,
    sample_y2,
    sample_y2_series,
    sample_z_prime,
)
from hestonsim.diagnostics import RunDiagnostics
from hestonsim.exceptions import InvalidArgumentError, MissingTableError
from hestonsim.sampling import RngStream
from hestonsim.tables import SUM_BASES, Y2_DENOMINATORS, TableSet

N = 100_000


def laplace(parameter: float, b: float) -> float:
    root = math.sqrt(2.0 * b)
    return (root / math.sinh(root)) ** parameter


def check_laplace(draws: np.ndarray, parameter: float, b: float) -> None:
    values = np.exp(-b * draws)
    se = float(values.std(ddof=1)) / math.sqrt(values.size)
    assert abs(values.mean() - laplace(parameter, b)) <= 3.0 * se


def test_decompose_count() -> None:
    assert dict(decompose_count(1).multiplicities) == {
        base: int(base == 1) for base in SUM_BASES
    }
    split = decompose_count(1_234_567)
    assert split.multiplicities[1_000_000] == 1
    assert split.multiplicities[100_000] == 2
    assert split.multiplicities[10_000] == 3
    assert split.multiplicities[5_000] == 0
    assert split.multiplicities[50] == 91
    assert split.multiplicities[10] == 1
    assert split.multiplicities[1] == 7
    assert split.total == 1_234_567
    sixty = decompose_count(60).multiplicities
    assert (sixty[50], sixty[10], sixty[1]) == (1, 1, 0)
    assert decompose_count(60).draws == 2
    for bad in (0, -3, 2.5):
        with pytest.raises(InvalidArgumentError):
            decompose_count(bad)  # type: ignore[arg-type]


def test_decompose_h() -> None:
    digits = decompose_h(0.634)
    assert {k: d for k, d in digits.digits.items() if d} == {
        5: 2,
        10: 2,
        50: 1,
        100: 1,
        500: 2,
    }
    assert digits.value == Decimal("0.634")
    assert {k: d for k, d in decompose_h(0.2).digits.items() if d} == {5: 1}
    assert {k: d for k, d in decompose_h(0.04).digits.items() if d} == {
        50: 2
    }
    with pytest.raises(InvalidArgumentError):
        decompose_h(0.0004)


def test_decompose_h_every_value() -> None:
    for i in range(1, 1000):
        h = Decimal(i) / 1000
        digits = decompose_h(float(h))
        assert digits.value == h
        assert digits.integer_part == 0
        assert all(0 <= d <= 2 for k, d in digits.digits.items() if k != 5)
        assert set(digits.digits) <= set(Y2_DENOMINATORS)


def test_decompose_h_whole_part() -> None:
    digits = decompose_h(1.25)
    assert digits.integer_part == 1
    assert digits.value == Decimal("1.25")


def test_round_h() -> None:
    assert round_h(0.63418) == Decimal("0.634")
    assert round_h(0.0005) == Decimal("0.000")
    assert round_h(0.0015) == Decimal("0.002")
    assert h_denominators(3) == Y2_DENOMINATORS
    assert h_denominators(2) == (5, 10, 20, 50, 100, 200)


def test_sample_s_p_moments(tables: TableSet, stream: RngStream) -> None:
    for count in (10, 60):
        draws = np.asarray(sample_s_p(np.full(N, count), tables, stream))
        var = 2.0 * count / 45.0
        assert abs(draws.mean() - count / 3.0) <= 3.0 * math.sqrt(var / N)
        fourth = np.mean((draws - count / 3.0) ** 4)
        assert abs(draws.var() - var) <= 3.0 * math.sqrt(
            (fourth - var**2) / N
        )


def test_sample_s_p_laplace(tables: TableSet, stream: RngStream) -> None:
    draws = np.asarray(sample_s_p(np.ones(N, dtype=int), tables, stream))
    check_laplace(draws, 1.0, 0.5)
    assert laplace(1.0, 0.5) == pytest.approx(1.0 / math.sinh(1.0))


@pytest.mark.parametrize("base", [1, 10, 50])
def test_sum_tables_laplace(
    tables: TableSet, stream: RngStream, base: int
) -> None:
    draws = np.asarray(sample_s_p(np.full(N, base), tables, stream))
    for b in (0.2, 1.0):
        check_laplace(draws, float(base), b)


def test_sample_s_p_mixed_counts(tables: TableSet, stream: RngStream) -> None:
    counts = np.array([0, 1, 7, 0, 55])
    draws = np.asarray(sample_s_p(counts, tables, stream))
    assert draws.shape == (5,)
    assert draws[0] == 0.0
    assert draws[3] == 0.0
    assert np.all(draws[[1, 2, 4]] > 0)
    assert isinstance(sample_s_p(3, tables, stream), float)
    with pytest.raises(InvalidArgumentError):
        sample_s_p(np.array([1, -1]), tables, stream)


def test_sample_s_p_additive(tables: TableSet, stream: RngStream) -> None:
    n = 50_000
    twenty = np.asarray(sample_s_p(np.full(n, 20), tables, stream))
    ten = np.asarray(sample_s_p(np.full(2 * n, 10), tables, stream))
    assert stats.ks_2samp(twenty, ten[:n] + ten[n:]).pvalue > 0.01


def test_sample_s_p_missing_table(stream: RngStream) -> None:
    tables = TableSet({})
    with pytest.raises(MissingTableError):
        sample_s_p(1, tables, stream)


@pytest.mark.parametrize("h", [0.04, 0.2, 0.634])
def test_sample_y2(tables: TableSet, stream: RngStream, h: float) -> None:
    diagnostics = RunDiagnostics()
    draws = np.asarray(sample_y2(h, tables, stream, N, diagnostics))
    assert np.all(draws >= 0)
    var = 2.0 * h / 45.0
    assert abs(draws.mean() - h / 3.0) <= 3.0 * math.sqrt(var / N)
    check_laplace(draws, h, 1.0)
    assert diagnostics.h == h
    assert diagnostics.h_relative_bias == 0.0


def test_sample_y2_half(tables: TableSet, stream: RngStream) -> None:
    draws = np.asarray(sample_y2(0.5, tables, stream, N))
    check_laplace(draws, 0.5, 1.0)


def test_sample_y2_rounding(tables: TableSet, stream: RngStream) -> None:
    diagnostics = RunDiagnostics()
    sample_y2(0.63418, tables, stream, 10, diagnostics)
    assert diagnostics.h_rounded == pytest.approx(0.634)
    assert diagnostics.h_relative_bias == pytest.approx(
        0.00018 / 0.63418, rel=1e-9
    )


def test_sample_z_prime(tables: TableSet, stream: RngStream) -> None:
    draws = np.asarray(sample_z_prime(tables, stream, N))
    var = 4.0 / 45.0
    assert abs(draws.mean() - 2.0 / 3.0) <= 3.0 * math.sqrt(var / N)
    fourth = np.mean((draws - 2.0 / 3.0) ** 4)
    assert abs(draws.var() - var) <= 3.0 * math.sqrt((fourth - var**2) / N)
    check_laplace(draws, 2.0, 0.2)
    assert isinstance(sample_z_prime(tables, stream), float)


def test_series_match_tables(tables: TableSet) -> None:
    stream = RngStream(17)
    n = 20_000
    series = sample_s_series(2_000, stream, n)
    table = np.asarray(tables.sum_table(1).variates(stream.uniforms(n)))
    assert stats.ks_2samp(series, table).pvalue > 0.01

    # Z' is the h = 2 core.
    series = sample_y2_series(2.0, 200, 12, stream, n)
    table = np.asarray(sample_z_prime(tables, stream, n))
    assert stats.ks_2samp(series, table).pvalue > 0.01


def test_c_series_moments() -> None:
    """``C^h`` has mean ``h`` and variance ``2h/3``."""
    stream = RngStream(9)
    n = 50_000
    for gamma_tail in (False, True):
        draws = sample_c_series(0.5, 200, stream, n, gamma_tail=gamma_tail)
        assert abs(draws.mean() - 0.5) <= 3.0 * math.sqrt(1.0 / 3.0 / n)
    with pytest.raises(InvalidArgumentError):
        sample_c_series(0.0, 10, stream, 5)
    with pytest.raises(InvalidArgumentError):
        sample_s_series(0, stream, 5)
