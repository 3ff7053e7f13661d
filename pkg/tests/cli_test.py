"""Tests for the command-line interface."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, List

from click.testing import CliRunner

from hestonsim.cli import MOMENT_COLUMNS, PRICE_COLUMNS, main
from hestonsim.tables import load_table


def read_csv(path: Path) -> List[Dict[str, str]]:
    with path.open() as f:
        return list(csv.DictReader(f))


def test_help() -> None:
    runner = CliRunner()
    result = runner.invoke(main, ["help"])
    assert result.exit_code == 0
    assert "price" in result.output
    assert "selftest" in result.output

    result = runner.invoke(main, ["help", "moments"])
    assert result.exit_code == 0
    assert "--v-t" in result.output

    result = runner.invoke(main, ["help", "nonsense"])
    assert result.exit_code == 2


def test_price_european(tmp_path: Path) -> None:
    output = tmp_path / "price.csv"
    result = CliRunner().invoke(
        main,
        ["price", "european", "--n-paths", "2000", "-o", str(output)],
    )
    assert result.exit_code == 0, result.output
    rows = read_csv(output)
    assert len(rows) == 1
    assert list(rows[0]) == PRICE_COLUMNS
    assert rows[0]["case"] == "case1"
    assert rows[0]["scheme"] == "exact-direct"
    assert rows[0]["strike"] == "100.0"
    assert float(rows[0]["estimate"]) > 0
    assert float(rows[0]["proposals_mean"]) >= 1


def test_price_from_config(assets: Path, tmp_path: Path) -> None:
    output = tmp_path / "price.csv"
    result = CliRunner().invoke(
        main,
        [
            "price",
            "european",
            "--config",
            str(assets / "run.yaml"),
            "--strike",
            "105",
            "-o",
            str(output),
        ],
    )
    assert result.exit_code == 0, result.output
    (row,) = read_csv(output)
    assert row["case"] == "case4"
    assert row["scheme"] == "euler-ft"
    assert row["strike"] == "105.0"
    assert row["n_paths"] == "2000"
    assert row["proposals_mean"] == ""


def test_price_to_stdout() -> None:
    result = CliRunner().invoke(
        main, ["price", "barrier", "--n-paths", "1000", "--seed", "2"]
    )
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    header = lines.index(",".join(PRICE_COLUMNS))
    assert lines[header + 1].startswith("exact-direct,barrier,,")

    result = CliRunner().invoke(
        main, ["price", "asian", "--n-paths", "1000", "--n-fixings", "2"]
    )
    assert result.exit_code == 0, result.output
    assert "asian" in result.output


def test_price_errors() -> None:
    runner = CliRunner()
    result = runner.invoke(
        main, ["price", "european", "--case", "case1", "--kappa", "-1"]
    )
    assert result.exit_code == 1
    assert "ValidationError" in result.output

    result = runner.invoke(
        main, ["price", "barrier", "--lower", "120", "--n-paths", "10"]
    )
    assert result.exit_code == 1
    assert "InvalidArgumentError" in result.output

    result = runner.invoke(main, ["price", "european", "--case", "case9"])
    assert result.exit_code == 2


def test_moments(tmp_path: Path) -> None:
    output = tmp_path / "moments.csv"
    result = CliRunner().invoke(
        main,
        [
            "moments",
            "--t",
            "1",
            "--n-paths",
            "2000",
            "--v-t",
            "0.02",
            "--v-t",
            "0.04",
            "--k-value",
            "1",
            "-o",
            str(output),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "X2 mean" in result.output
    rows = read_csv(output)
    assert len(rows) == 8
    assert list(rows[0]) == MOMENT_COLUMNS
    assert {row["v_t"] for row in rows} == {"0.02", "0.04"}
    assert rows[0]["significant"] in ("True", "False")


def test_tables_validate() -> None:
    result = CliRunner().invoke(main, ["tables", "validate"])
    assert result.exit_code == 0, result.output
    assert result.output.count(": ok,") == 17
    assert "NOT MONOTONE" not in result.output


def test_tables_regen(tmp_path: Path) -> None:
    result = CliRunner().invoke(
        main, ["tables", "regen", "zprime", "--write", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    assert "zprime: max deviation" in result.output
    table = load_table(tmp_path / "zprime.tbl")
    assert table.base_id == "zprime"
    assert table.parameter == 2.0

    result = CliRunner().invoke(main, ["tables", "regen", "sp_5000"])
    assert result.exit_code == 1
    assert "No oracle" in result.output


def test_selftest() -> None:
    result = CliRunner().invoke(main, ["selftest", "--quick"])
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert any(line.startswith("PASS oracle sp_1") for line in lines)
    assert any(line.startswith("PASS martingale") for line in lines)
    assert not any(line.startswith("FAIL") for line in lines)
