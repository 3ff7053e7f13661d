"""Tests for path simulation and option pricing."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from hestonsim.bridge import BridgeConfig, exact_moments_q
from hestonsim.engine import (
    HestonEngine,
    default_steps,
    euler_full_truncation_path,
    exact_step,
)
from hestonsim.exceptions import InvalidArgumentError
from hestonsim.models import CASES, Product, Scheme
from hestonsim.sampling import RngStream
from hestonsim.tables import TableSet

from .support.heston import heston_call_price


def within(estimate: float, expected: float, se: float) -> bool:
    return abs(estimate - expected) <= 3.0 * se


def test_default_steps() -> None:
    assert default_steps(1) == 1
    assert default_steps(10_000) == 100
    assert default_steps(1_000_000) == 1000


def test_martingale(engine: HestonEngine) -> None:
    params = CASES["case3"]
    report = engine.price_european_call(
        params, 0.0, 20_000, seed=5, case="case3"
    )
    assert report.product is Product.EUROPEAN
    assert report.case == "case3"
    assert report.steps is None
    assert report.proposals_mean is not None
    assert report.proposals_mean >= 1.0
    assert within(report.estimate, params.s0, report.std_error)


def test_european_matches_fourier(engine: HestonEngine) -> None:
    params = CASES["case4"]
    expected = heston_call_price(params, 100.0)
    report = engine.price_european_call(params, 100.0, 40_000, seed=11)
    assert within(report.estimate, expected, report.std_error)

    # h for this case rounds from 0.63418 to 0.634.
    assert report.h == pytest.approx(params.delta / 2.0)
    assert report.h_rounded == pytest.approx(0.634)
    assert 0 < report.h_relative_bias < 1e-3


def test_european_no_correlation(engine: HestonEngine) -> None:
    params = CASES["barrier"]
    expected = heston_call_price(params, 105.0)
    report = engine.price_european_call(params, 105.0, 40_000, seed=2)
    assert within(report.estimate, expected, report.std_error)


def test_euler_matches_fourier(engine: HestonEngine) -> None:
    params = CASES["case4"]
    expected = heston_call_price(params, 100.0)
    report = engine.price_european_call(
        params, 100.0, 40_000, scheme=Scheme.EULER_FT, seed=3, steps=50
    )
    assert report.steps == 50
    assert report.proposals_mean is None
    assert report.h is None
    # Discretization bias is small against the noise with 50 steps.
    assert abs(report.estimate - expected) <= 4.0 * report.std_error


def test_gamma_baseline(engine: HestonEngine) -> None:
    params = CASES["case4"]
    report = engine.price_european_call(
        params, 0.0, 10_000, scheme=Scheme.EXACT_GAMMA_BASELINE, K=2
    )
    assert report.h is None
    assert report.proposals_mean is not None
    assert within(report.estimate, params.s0, report.std_error)


def test_deep_in_the_money(engine: HestonEngine) -> None:
    params = CASES["case4"]
    zero = engine.price_european_call(params, 0.0, 10_000, seed=1)
    deep = engine.price_european_call(params, 1.0, 10_000, seed=1)
    discount = math.exp(-params.r * params.t)

    # With the same paths, lowering the strike by one adds the discount.
    assert zero.estimate - deep.estimate == pytest.approx(discount)


def test_determinism(engine: HestonEngine) -> None:
    params = CASES["case1"]
    first = engine.price_european_call(params, 100.0, 5_000, seed=9)
    second = engine.price_european_call(params, 100.0, 5_000, seed=9)
    other = engine.price_european_call(params, 100.0, 5_000, seed=10)
    assert first.estimate == second.estimate
    assert first.std_error == second.std_error
    assert first.estimate != other.estimate


def test_chunking_is_transparent(
    tables: TableSet, engine: HestonEngine
) -> None:
    params = CASES["case4"]
    one = engine.price_european_call(params, 100.0, 3_000, seed=4)
    small = HestonEngine(tables, engine.logger, chunk_size=1_000)
    three = small.price_european_call(params, 100.0, 3_000, seed=4)
    assert three.n_paths == one.n_paths
    se = math.hypot(one.std_error, three.std_error)
    assert abs(one.estimate - three.estimate) <= 4.0 * se


def test_asian_single_fixing(engine: HestonEngine) -> None:
    params = CASES["asian"]
    for scheme in (Scheme.EXACT_DIRECT, Scheme.EULER_FT):
        asian = engine.price_asian_call(
            params, 100.0, 1, 5_000, scheme=scheme, seed=8
        )
        european = engine.price_european_call(
            params, 100.0, 5_000, scheme=scheme, seed=8
        )
        assert asian.product is Product.ASIAN
        assert asian.estimate == pytest.approx(european.estimate)


def test_asian_average(engine: HestonEngine) -> None:
    params = CASES["asian"]
    asian = engine.price_asian_call(params, 0.0, None, 10_000, seed=6)
    # The mean of the fixings of a martingale is s0.
    assert within(asian.estimate, params.s0, asian.std_error)

    euler = engine.price_asian_call(
        params, 100.0, 4, 10_000, scheme=Scheme.EULER_FT
    )
    assert euler.steps == 100
    exact = engine.price_asian_call(params, 100.0, 4, 10_000, seed=1)
    se = math.hypot(euler.std_error, exact.std_error)
    assert abs(euler.estimate - exact.estimate) <= 4.0 * se


def test_double_no_touch(engine: HestonEngine) -> None:
    params = CASES["barrier"]
    sure = engine.price_double_no_touch(params, 0.0, math.inf, 12, 2_000)
    assert sure.estimate == pytest.approx(1.0)
    assert sure.std_error == 0.0

    narrow = engine.price_double_no_touch(params, 90, 110, 12, 5_000, seed=3)
    wide = engine.price_double_no_touch(params, 80, 120, 12, 5_000, seed=3)
    daily = engine.price_double_no_touch(params, 80, 120, 52, 5_000, seed=3)
    assert 0.0 < narrow.estimate <= wide.estimate < 1.0
    assert daily.estimate < wide.estimate + 3.0 * wide.std_error
    assert narrow.product is Product.BARRIER
    assert narrow.strike is None


def test_double_no_touch_euler(engine: HestonEngine) -> None:
    params = CASES["barrier"]
    report = engine.price_double_no_touch(
        params, 80, 120, 12, 10_000, scheme=Scheme.EULER_FT
    )
    assert report.steps == 96
    exact = engine.price_double_no_touch(params, 80, 120, 12, 10_000)
    se = math.hypot(report.std_error, exact.std_error)
    assert abs(report.estimate - exact.estimate) <= 4.0 * se


def test_bad_arguments(engine: HestonEngine) -> None:
    params = CASES["case1"]
    with pytest.raises(InvalidArgumentError):
        engine.price_european_call(params, 100.0, 0)
    with pytest.raises(InvalidArgumentError):
        engine.price_european_call(params, -1.0, 10)
    with pytest.raises(InvalidArgumentError):
        engine.price_european_call(params, 100.0, 10, K=-1)
    with pytest.raises(InvalidArgumentError):
        engine.price_asian_call(params, 100.0, 0, 10)
    with pytest.raises(InvalidArgumentError):
        engine.price_double_no_touch(params, 110, 120, 12, 10)
    with pytest.raises(InvalidArgumentError):
        engine.price_double_no_touch(params, 90, 110, 0, 10)


def test_exact_step_composes(tables: TableSet) -> None:
    """Two half steps give the same law as one full step."""
    params = CASES["case4"]
    n = 20_000
    stream = RngStream(21)
    start = np.full(n, 0.02)
    s_one, v_one = exact_step(100.0, start, 1.0, params, 1, tables, stream)
    s_half, v_half = exact_step(100.0, start, 0.5, params, 1, tables, stream)
    s_two, v_two = exact_step(s_half, v_half, 0.5, params, 1, tables, stream)
    assert stats.ks_2samp(v_one, v_two).pvalue > 0.001
    assert stats.ks_2samp(np.log(s_one), np.log(s_two)).pvalue > 0.001
    with pytest.raises(InvalidArgumentError):
        exact_step(-1.0, 0.02, 1.0, params, 1, tables, stream)


def test_euler_path_without_noise() -> None:
    params = CASES["case1"].copy(update={"sigma": 1e-12, "v0": 0.09})
    n_steps = 40
    result = euler_full_truncation_path(
        params, n_steps, RngStream(1), size=3, record_path=True
    )
    dt = params.t / n_steps
    expected = params.theta + (params.v0 - params.theta) * (
        1.0 - params.kappa * dt
    ) ** n_steps
    assert result.v == pytest.approx(np.full(3, expected), rel=1e-6)
    assert result.path is not None
    assert result.path.shape == (n_steps, 3)
    assert np.array_equal(result.path[-1], result.s)
    with pytest.raises(InvalidArgumentError):
        euler_full_truncation_path(params, 0, RngStream(1))


@pytest.mark.parametrize("v_t", [0.04, 4.0, 4e-6])
def test_moment_error_report(engine: HestonEngine, v_t: float) -> None:
    params = CASES["case1"].copy(update={"t": 1.0})
    report = engine.moment_error_report(
        params, [v_t], [1], 40_000, seed=3, case="case1"
    )
    assert [r.order for r in report.rows] == [1, 2, 3, 4]

    # Moments are of the integrated variance, not the rescaled bridge.
    cfg = BridgeConfig.from_heston(params, params.v0, v_t, 1.0, 1)
    exact = exact_moments_q(cfg, 4)
    scale = 4.0 / params.sigma**2
    for row in report.rows:
        assert row.case == "case1"
        assert row.v_t == v_t
        assert row.K == 1
        assert row.exact_moment == pytest.approx(
            scale**row.order * exact[row.order - 1], rel=1e-12
        )
        if row.order <= 2:
            assert row.abs_error <= row.three_se
            assert not row.significant


def test_moment_error_report_grid(engine: HestonEngine) -> None:
    params = CASES["case1"].copy(update={"t": 1.0})
    report = engine.moment_error_report(
        params, [0.02, 0.04], [1, 2], 2_000, seed=3
    )
    assert len(report.rows) == 16
    assert {(r.v_t, r.K) for r in report.rows} == {
        (0.02, 1),
        (0.02, 2),
        (0.04, 1),
        (0.04, 2),
    }

    # h = 0.04 needs no rounding.
    tau = params.sigma**2 / 4.0
    assert report.x2_mean == pytest.approx(tau**2 * 0.04 / 3.0)
    assert report.x2_mean_rounded == pytest.approx(report.x2_mean)

    with pytest.raises(InvalidArgumentError):
        engine.moment_error_report(
            params, [0.04], [1], 10, scheme=Scheme.EULER_FT
        )
    with pytest.raises(InvalidArgumentError):
        engine.moment_error_report(params, [-0.1], [1], 10)
