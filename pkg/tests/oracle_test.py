"""Tests for the distribution-function oracle of ``S^P``."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest
from scipy import integrate, special

from hestonsim.exceptions import InvalidArgumentError
from hestonsim.oracle import (
    LargePCheck,
    OracleConfig,
    cdf_sp,
    fit_chebyshev,
    gamma_match,
    invert_cdf,
    leading_cdf_left,
    leading_tail_form,
    regenerate_table,
    statistical_check,
)
from hestonsim.sampling import RngStream
from hestonsim.specfun import clenshaw_eval
from hestonsim.tables import TableSet

GRID = [0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99]


@pytest.mark.parametrize("parameter", [0.2, 1.0, 2.0, 10.0])
def test_cdf_shape(parameter: float) -> None:
    xs = np.linspace(0.02, 3.0, 25) * max(1.0, parameter / 3.0)
    values = [cdf_sp(parameter, float(x)) for x in xs]
    assert cdf_sp(parameter, 0.0) == 0.0
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] > 0.99


@pytest.mark.parametrize("parameter", [0.5, 1.0, 2.0])
def test_cdf_mean(parameter: float) -> None:
    """``E[S^P] = P / 3`` from the integrated survival function."""
    mean, _ = integrate.quad(
        lambda x: 1.0 - cdf_sp(parameter, x), 0.0, 8.0, limit=200
    )
    assert mean == pytest.approx(parameter / 3.0, rel=1e-7)


def test_left_tail_form() -> None:
    errors = [
        abs(leading_cdf_left(1.0, x) / cdf_sp(1.0, x) - 1.0)
        for x in (0.08, 0.04, 0.02)
    ]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.1


def test_tail_forms() -> None:
    assert gamma_match(2.0) == (5.0, 7.5)
    assert leading_tail_form(1.0, 0.01) < leading_tail_form(1.0, 0.99)
    with pytest.raises(InvalidArgumentError):
        leading_tail_form(1.0, 1.0)


@pytest.mark.parametrize(
    "base_id,parameter", [("sp_1", 1.0), ("zprime", 2.0)]
)
def test_inversion_matches_tables(
    tables: TableSet, base_id: str, parameter: float
) -> None:
    table = tables.get(base_id)
    for u in GRID:
        x = invert_cdf(parameter, u)
        assert abs(cdf_sp(parameter, x) - u) <= 1e-11
        assert float(table.variates(u)) == pytest.approx(x, rel=1e-8)


def test_inversion_fractional(tables: TableSet) -> None:
    table = tables.y2_table(5)
    for u in (0.1, 0.5, 0.9):
        x = invert_cdf(0.2, u)
        assert float(table.variates(u)) == pytest.approx(x, rel=1e-8)


def test_switch_constant() -> None:
    # The point where G changes series must not move the result.
    low = OracleConfig(switch_const=2.625)
    high = OracleConfig(switch_const=3.0)
    for x in (0.1, 0.3, 1.0):
        assert cdf_sp(0.5, x, low) == pytest.approx(
            cdf_sp(0.5, x, high), abs=1e-9
        )
    assert high.switch_point(0.5) == pytest.approx(6.0)


def test_fit_chebyshev() -> None:
    coeffs = fit_chebyshev(np.exp, 20)
    z = np.linspace(-1.0, 1.0, 41)
    approx = np.asarray(clenshaw_eval(coeffs, z))
    assert np.max(np.abs(approx - np.exp(z))) < 1e-14
    with pytest.raises(InvalidArgumentError):
        fit_chebyshev(np.exp, 41)


def test_regenerate_table(tables: TableSet) -> None:
    result = regenerate_table(tables.get("zprime"), grid_size=20)
    assert result.max_deviation < 1e-8
    assert all(r.max_error < 1e-8 for r in result.report)
    assert result.table.base_id == "zprime"
    with pytest.raises(InvalidArgumentError):
        regenerate_table(tables.sum_table(5000))


def test_statistical_check(tables: TableSet) -> None:
    check = statistical_check(5000, tables, RngStream(3), n=50_000)
    assert check.parameter == 5000
    assert check.passed
    assert len(check.laplace_b) == 2

    skewed = dataclasses.replace(
        check,
        third_moment=check.exact_third_moment + 4.0 * check.third_moment_se,
    )
    assert not skewed.passed


def test_large_p_skewness() -> None:
    c = 2.0 / math.pi**2
    kappa2 = c**2 * special.zeta(4)
    kappa3 = 2.0 * c**3 * special.zeta(6)
    for parameter in (1, 5000):
        check = LargePCheck(parameter, 10, 0.0, 1.0, 0.0, 1.0, [], [], [], [])
        expected = kappa3 / math.sqrt(parameter * kappa2**3)
        assert check.exact_third_moment == pytest.approx(expected, rel=1e-12)


def test_bad_arguments() -> None:
    with pytest.raises(InvalidArgumentError):
        cdf_sp(1.5, 0.3)
    with pytest.raises(InvalidArgumentError):
        cdf_sp(0.0, 0.3)
    with pytest.raises(InvalidArgumentError):
        cdf_sp(1.0, -0.3)
    with pytest.raises(InvalidArgumentError):
        invert_cdf(1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        OracleConfig(outer_terms=0)
    with pytest.raises(InvalidArgumentError):
        OracleConfig(root_tol=1e-3)
    with pytest.raises(InvalidArgumentError):
        OracleConfig(switch_const=0.5)
    assert math.isfinite(cdf_sp(1.0, 50.0))
