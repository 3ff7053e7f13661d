"""Tests for the request, report and settings models."""

from __future__ import annotations

from pathlib import Path

import pytest
from pydantic import ValidationError

from hestonsim.bridge import X2Mode
from hestonsim.exceptions import InvalidArgumentError
from hestonsim.models import (
    CASES,
    MomentErrorRow,
    PricingRequest,
    RunConfig,
    Scheme,
    resolve_params,
)


def test_cases() -> None:
    assert CASES["case1"].delta == pytest.approx(0.08)
    assert CASES["case4"].delta / 2 == pytest.approx(0.634184, abs=1e-6)
    assert CASES["case3"].mu == 0.05
    with pytest.raises(TypeError):
        CASES["case1"].kappa = 2.0


def test_scheme() -> None:
    assert Scheme.EXACT_DIRECT.is_exact
    assert not Scheme.EULER_FT.is_exact
    assert Scheme.EXACT_GAMMA_BASELINE.x2_mode is X2Mode.TRUNCATION_BASELINE
    assert Scheme("euler-ft") is Scheme.EULER_FT


def test_resolve_params() -> None:
    params = resolve_params("case1", None, {"rho": 0.0, "t": None})
    assert params.rho == 0.0
    assert params.t == 10
    assert params.r == 0.0

    explicit = resolve_params(None, CASES["case3"], {"s0": 90.0})
    assert explicit.s0 == 90.0
    assert explicit.r == 0.05

    with pytest.raises(InvalidArgumentError):
        resolve_params("case9", None)
    with pytest.raises(InvalidArgumentError):
        resolve_params(None, None, {"kappa": 1.0})
    with pytest.raises(ValidationError):
        resolve_params("case1", None, {"sigma": -1.0})


def test_run_config(assets: Path) -> None:
    settings = RunConfig.from_file(assets / "run.yaml")
    assert settings.case == "case4"
    assert settings.scheme is Scheme.EULER_FT
    assert settings.steps == 20
    assert settings.strike == 95
    assert settings.v_t == [0.04]

    merged = settings.merged({"seed": 7, "strike": None, "kappa": 2.0})
    assert merged.seed == 7
    assert merged.strike == 95
    params = merged.params()
    assert params.kappa == 2.0
    assert params.theta == CASES["case4"].theta


def test_run_config_not_a_mapping(tmp_path: Path) -> None:
    path = tmp_path / "bad.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(InvalidArgumentError):
        RunConfig.from_file(path)
    path.write_text("")
    assert RunConfig.from_file(path) == RunConfig()


def test_pricing_request() -> None:
    with pytest.raises(ValidationError):
        PricingRequest(n_paths=10)
    request = PricingRequest(case="case1")
    assert request.scheme is Scheme.EXACT_DIRECT
    assert request.n_paths == 10_000


def test_moment_row() -> None:
    row = MomentErrorRow(
        v_t=0.04,
        K=1,
        order=2,
        sample_moment=1.1,
        exact_moment=1.0,
        abs_error=0.1,
        three_se=0.05,
    )
    assert row.significant
    assert row.csv_row()["significant"] is True
