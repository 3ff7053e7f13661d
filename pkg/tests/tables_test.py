"""Tests for the piecewise Chebyshev inverse CDF tables."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from hestonsim.diagnostics import RunDiagnostics
from hestonsim.exceptions import (
    CorruptedTableError,
    MissingTableError,
    TableAuditError,
    TableParseError,
)
from hestonsim.sampling import RngStream
from hestonsim.tables import (
    SUM_BASES,
    Y2_DENOMINATORS,
    ScalingKind,
    TableSet,
    audit_table,
    destandardize,
    dump_table,
    inverse_cdf,
    load_table,
    parse_table,
    scale_u,
    unscale_u,
    validate_table,
)

# With P = 45/2 the linear central scaling is U = u_right - u, so both
# regimes below evaluate to 1 + 3 z with z = 4 U - 1.
LINEAR = """\
# Synthetic table
base_id linear
parameter 22.5
standardized false
anchor none

regime low
u_right 0.5
scaling_kind linear_central
k1 4
k2 -1
degree 1
1.0
0.75
end

regime high
u_right {u_right}
scaling_kind linear_central
k1 4
k2 -1
degree 1
2.0
1.5
end
"""

UPPER = "9.999999999990000e-01"

HIGH_KIND = "linear_central\nk1 4\nk2 -1\ndegree 1\n2"
LOW_KIND = "linear_central\nk1 4\nk2 -1\ndegree 1\n1"
LOW_MAP = "k1 4\nk2 -1\ndegree 1\n1.0"


def linear_table(**overrides: str) -> str:
    values = {"u_right": UPPER}
    values.update(overrides)
    return LINEAR.format(**values)


def test_parse_and_evaluate() -> None:
    table = parse_table(linear_table())
    assert table.base_id == "linear"
    assert table.title == "Synthetic table"
    assert [r.label for r in table.regimes] == ["low", "high"]
    assert table.regimes[1].u_left == 0.5
    assert table.regimes[0].degree == 1

    # low: 0.5 + 0.75 (4 (0.5 - u) - 1); high: 1 + 1.5 (4 (1 - u) - 1).
    assert table.quantile(0.25) == pytest.approx(0.5 + 0.75 * 0.0)
    assert table.quantile(0.75) == pytest.approx(1.0 + 1.5 * 0.0, abs=1e-9)
    u = np.array([0.1, 0.4, 0.6, 0.9])
    assert np.asarray(table.regime_index(u)).tolist() == [0, 0, 1, 1]
    assert np.shape(inverse_cdf(table, u)) == (4,)


def test_clipping_is_counted() -> None:
    table = parse_table(linear_table())
    diagnostics = RunDiagnostics()
    values = table.quantile(np.array([0.0, 0.3, 1.0]), diagnostics)
    assert diagnostics.clipped_uniforms == 2
    assert np.all(np.isfinite(values))


def test_dump_preserves_text() -> None:
    text = linear_table()
    table = parse_table(text)
    dumped = dump_table(table)
    assert f"u_right {UPPER}" in dumped
    assert parse_table(dumped) == table


def test_load_table(tmp_path: Path) -> None:
    path = tmp_path / "linear.tbl"
    path.write_text(linear_table())
    table = load_table(path)
    assert table.parameter == 22.5
    tables = TableSet.from_directory(tmp_path)
    assert tables.ids == ["linear"]
    assert "linear" in tables
    assert len(tables) == 1
    with pytest.raises(MissingTableError):
        tables.sum_table(1)


def test_missing_directory(tmp_path: Path) -> None:
    with pytest.raises(MissingTableError):
        TableSet.from_directory(tmp_path / "nowhere")
    with pytest.raises(MissingTableError):
        TableSet.from_directory(tmp_path)


@pytest.mark.parametrize(
    "text,error,where",
    [
        (
            linear_table().replace("degree 1\n2.0", "degree 2\n2.0"),
            TableParseError,
            "linear/high",
        ),
        (
            linear_table().replace("degree 1\n1.0", "degree 41\n1.0"),
            TableParseError,
            "linear/low",
        ),
        (
            linear_table().replace(HIGH_KIND, "cubic" + HIGH_KIND[14:]),
            TableParseError,
            "linear/high",
        ),
        (
            linear_table().replace("0.75", "zero"),
            TableParseError,
            "linear/low",
        ),
        (
            linear_table().replace("standardized false\n", ""),
            TableParseError,
            "linear",
        ),
        (linear_table(u_right="0.4"), TableAuditError, "linear/high"),
        (linear_table(u_right="0.99"), TableAuditError, "linear/high"),
        (
            linear_table().replace(LOW_MAP, "k1 8" + LOW_MAP[4:]),
            TableAuditError,
            "linear/low",
        ),
        (
            linear_table().replace(
                LOW_KIND, "central_product" + LOW_KIND[14:]
            ),
            TableAuditError,
            "linear/low",
        ),
        (
            linear_table().replace("1.5\nend\n", "1.5\n"),
            TableParseError,
            "linear/high",
        ),
    ],
)
def test_parse_errors(text: str, error: type, where: str) -> None:
    with pytest.raises(error) as excinfo:
        parse_table(text)
    assert str(excinfo.value).startswith(f"{where}:")


def test_regime_index_out_of_range() -> None:
    table = parse_table(linear_table())
    with pytest.raises(CorruptedTableError):
        table.regime_index(np.array([1.0]))


@pytest.mark.parametrize("kind", list(ScalingKind))
def test_scaling_inverts(kind: ScalingKind) -> None:
    u = np.array([0.01, 0.2, 0.45])
    scaled = scale_u(kind, u, 1.0, anchor=0.5, u_right=0.5)
    back = unscale_u(kind, scaled, 1.0, anchor=0.5, u_right=0.5)
    assert np.allclose(back, u, rtol=1e-12)


def test_scaling_needs_anchor() -> None:
    with pytest.raises(CorruptedTableError):
        scale_u(ScalingKind.CENTRAL_PRODUCT, 0.5, 1.0)


def test_destandardize() -> None:
    assert destandardize(45.0, 0.0) == pytest.approx(15.0)
    assert destandardize(45.0, 1.0) == pytest.approx(15.0 + math.sqrt(2.0))


def test_shipped_tables(tables: TableSet) -> None:
    for base in SUM_BASES:
        assert tables.sum_table(base).parameter == base
    for k in Y2_DENOMINATORS:
        assert tables.y2_table(k).parameter == pytest.approx(1.0 / k)
    assert tables.z_prime_table().parameter == 2.0
    assert len(tables) == len(SUM_BASES) + len(Y2_DENOMINATORS) + 1


def test_shipped_tables_audit(tables: TableSet) -> None:
    for table in tables:
        audit = audit_table(table)
        assert audit.monotone
        scale = max(1.0, abs(float(table.quantile(0.5))))
        assert audit.max_seam_jump <= 1e-6 * scale, table.base_id


@pytest.mark.parametrize(
    "base_id,parameter",
    [("sp_1", 1.0), ("zprime", 2.0), ("y2_5", 0.2), ("y2_50", 0.02)],
)
def test_small_table_moments(
    tables: TableSet, base_id: str, parameter: float
) -> None:
    """``S^P`` has mean ``P/3`` and variance ``2P/45``."""
    n = 200_000
    u = RngStream(3).uniforms(n)
    draws = np.asarray(tables.get(base_id).variates(u))
    var = 2.0 * parameter / 45.0
    assert abs(draws.mean() - parameter / 3.0) <= 3.0 * math.sqrt(var / n)
    fourth = np.mean((draws - parameter / 3.0) ** 4)
    se = math.sqrt((fourth - var**2) / n)
    assert abs(draws.var() - var) <= 3.0 * se


@pytest.mark.parametrize("base", [50, 5000, 1_000_000])
def test_standardized_table_moments(tables: TableSet, base: int) -> None:
    table = tables.sum_table(base)
    assert table.standardized
    n = 200_000
    z = np.asarray(table.quantile(RngStream(4).uniforms(n)))
    assert abs(z.mean()) <= 3.0 / math.sqrt(n)
    assert abs(z.var() - 1.0) <= 3.0 * math.sqrt(2.2 / n)


def test_validate_table_against_exact_quantile() -> None:
    table = parse_table(linear_table())

    def exact(u: float) -> float:
        if u <= 0.5:
            return 0.5 + 0.75 * (4.0 * (0.5 - u) - 1.0)
        return 1.0 + 1.5 * (4.0 * (1.0 - 1e-12 - u) - 1.0)

    assert validate_table(table, exact) <= 1e-12
