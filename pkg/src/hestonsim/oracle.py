"""A slow, trusted distribution function for ``S^P`` with small ``P``.

`cdf_sp` sums the series of the distribution function over ``n``, each term
holding an integral ``G(y)`` of the parabolic cylinder function.  ``G`` is
split at ``y*``: below it the power series of ``D_{P+1}`` is integrated term
by term against incomplete gamma functions, above it the asymptotic series
is.  For integer ``P`` the asymptotic series terminates and is exact, so
``G`` comes from it alone.

The oracle backs the table audits (`invert_cdf`) and regenerates the
small-``P`` tables (`regenerate_table`).  Large ``P`` tables have no oracle
here and are checked statistically (`statistical_check`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Callable, List, Optional, Tuple

import numpy as np
from numpy.polynomial import chebyshev
from scipy import optimize, special

from .components import sample_s_p
from .config import config
from .exceptions import (
    ConvergenceError,
    InvalidArgumentError,
    InversionFailureError,
    NumericFailureError,
)
from .specfun import (
    default_switch_constant,
    pcf_power_coefficients,
    upper_incomplete_gamma_scaled,
)
from .tables import (
    InverseCdfTable,
    RegimeSpec,
    ScalingKind,
    scale_u,
    unscale_u,
    validation_report,
)

if TYPE_CHECKING:
    from .sampling import RngStream
    from .tables import RegimeValidation, TableSet

__all__ = [
    "LargePCheck",
    "OracleConfig",
    "RegenerationResult",
    "cdf_sp",
    "fit_chebyshev",
    "gamma_match",
    "invert_cdf",
    "leading_cdf_left",
    "leading_tail_form",
    "quantile_function",
    "regenerate_table",
    "statistical_check",
]

_NEGLIGIBLE = 40.0
"""Outer terms this far below the largest (in log) are dropped."""


@dataclass(frozen=True)
class OracleConfig:
    """Budgets and tolerances of the distribution-function oracle."""

    outer_terms: int = 5000
    """Largest number of terms of the outer sum."""

    switch_const: Optional[float] = None
    """Switch constant; ``y* = max(switch_const (P + 3/2), y)``.  Unset
    means ``config.switch_constant`` or, failing that, the binary64
    crossover."""

    g1_terms: int = 4000
    """Budget of the power-series part of ``G``."""

    g2_terms: int = 400
    """Budget of the asymptotic part of ``G``."""

    root_tol: float = 1e-11
    """Allowed ``|F(x) - u|`` at an inverted quantile."""

    def __post_init__(self) -> None:
        for name in ("outer_terms", "g1_terms", "g2_terms"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be at least 1")
        if not 0.0 < self.root_tol <= 1e-6:
            raise InvalidArgumentError("root_tol must lie in (0, 1e-6]")
        if self.switch_const is not None and self.switch_const <= 1:
            raise InvalidArgumentError("switch_const must exceed 1")

    def switch_point(self, parameter: float) -> float:
        """The lower limit of ``y*`` for ``P = parameter``."""
        constant = self.switch_const
        if constant is None:
            constant = config.switch_constant
        if constant is None:
            constant = default_switch_constant(parameter)
        return constant * (parameter + 1.5)


DEFAULT_ORACLE = OracleConfig()


def _check_parameter(parameter: float) -> bool:
    """Validate ``P`` and report whether it is an integer."""
    if parameter <= 0:
        raise InvalidArgumentError(f"P must be positive, got {parameter}")
    integral = float(parameter).is_integer()
    if parameter > 1 and not integral:
        raise InvalidArgumentError(
            f"P must lie in (0, 1] or be an integer, got {parameter}"
        )
    return integral


def _log_g2(
    parameter: float, ys: np.ndarray, cfg: OracleConfig, exact: bool
) -> Tuple[np.ndarray, np.ndarray]:
    """``log |G2(y)|`` and its sign, from the asymptotic series.

    With ``exact`` (integer ``P``) every term of the terminating series is
    summed; otherwise the series is cut before its smallest term grows.
    """
    p = parameter
    big_x = 0.5 * ys * ys
    order = p + 1.0
    total = np.zeros(ys.shape)
    last = np.full(ys.shape, np.inf)
    active = np.ones(ys.shape, dtype=bool)
    coefficient = 1.0
    for k in range(cfg.g2_terms):
        if k > 0:
            coefficient *= (
                -(-order + 2 * k - 2) * (-order + 2 * k - 1) / (4.0 * k)
            )
        if coefficient == 0.0:
            break
        scaled = upper_incomplete_gamma_scaled(p - k + 0.5, big_x)
        term = coefficient * math.sqrt(0.5) * big_x**-k * scaled
        if exact:
            total = total + term
            continue
        size = np.abs(term)
        growing = active & (size > last)
        active &= ~growing
        total = np.where(active, total + term, total)
        last = np.where(active, size, last)
        active &= size > 1e-17 * np.abs(total)
        if not active.any():
            break
    else:
        if not exact and active.any():
            raise ConvergenceError(
                f"Asymptotic series of G for P = {p}", float(total[0]), k
            )
    log_prefix = -big_x + (p + 0.5) * np.log(big_x) + p * math.log(2.0)
    with np.errstate(divide="ignore"):
        return log_prefix + np.log(np.abs(total)), np.sign(total)


def _g1(
    parameter: float, ys: np.ndarray, ystar: float, cfg: OracleConfig
) -> np.ndarray:
    """The power-series part ``G1(y, y*)`` for each ``y < y*``."""
    p = parameter
    upper = 0.25 * ystar * ystar
    n_terms = int(math.ceil(2.0 * upper + 12.0 * ystar + 60.0))
    if n_terms > cfg.g1_terms:
        raise ConvergenceError(
            f"Power series of G for P = {p} needs {n_terms} terms", 0.0, 0
        )
    k = np.arange(n_terms)
    s = 0.5 * (p + k)
    e = pcf_power_coefficients(p + 1.0, n_terms)
    weight = e * 2.0 ** (p - 1.0) * np.exp(
        special.gammaln(s) - special.gammaln(0.5 * k + 1.0)
    )
    lower = (0.25 * ys * ys)[:, np.newaxis]
    low_side = upper <= s
    mass = np.where(
        low_side,
        special.gammainc(s, upper) - special.gammainc(s, lower),
        special.gammaincc(s, lower) - special.gammaincc(s, upper),
    )
    return mass @ weight


def _log_g(
    parameter: float, ys: np.ndarray, cfg: OracleConfig, integral: bool
) -> Tuple[np.ndarray, np.ndarray]:
    """``log |G(y)|`` and its sign for an array of positive ``y``."""
    if integral:
        log_g, sign = _log_g2(parameter, ys, cfg, True)
    else:
        ystar = cfg.switch_point(parameter)
        log_g = np.empty(ys.shape)
        sign = np.ones(ys.shape)
        beyond = ys >= ystar
        if beyond.any():
            log_g[beyond], sign[beyond] = _log_g2(
                parameter, ys[beyond], cfg, False
            )
        inside = ~beyond
        if inside.any():
            tail_log, tail_sign = _log_g2(
                parameter, np.array([ystar]), cfg, False
            )
            value = _g1(parameter, ys[inside], ystar, cfg)
            value = value + tail_sign[0] * np.exp(tail_log[0])
            with np.errstate(divide="ignore"):
                log_g[inside] = np.log(np.abs(value))
            sign[inside] = np.sign(value)
    if np.any(np.isnan(log_g)) or np.any(log_g == np.inf):
        raise NumericFailureError(
            "G is not finite",
            {"P": parameter, "y": ys.tolist(), "log_g": log_g.tolist()},
        )
    return log_g, sign


def cdf_sp(
    parameter: float, x: float, cfg: OracleConfig = DEFAULT_ORACLE
) -> float:
    """Distribution function of ``S^P`` at ``x``.

    Parameters
    ----------
    parameter : `float`
        ``P``, in ``(0, 1]`` or a positive integer.  Large integers lose
        accuracy to cancellation in the terminating series.
    x : `float`
        Nonnegative point.
    cfg : `OracleConfig`
        Budgets and switch point.

    Returns
    -------
    value : `float`
        ``F(x)``, clipped into ``[0, 1]``.

    Raises
    ------
    hestonsim.exceptions.ConvergenceError
        The outer sum did not settle within ``cfg.outer_terms`` terms.
    hestonsim.exceptions.NumericFailureError
        Some ``G(y)`` came out non-positive or non-finite.
    """
    integral = _check_parameter(parameter)
    if x < 0:
        raise InvalidArgumentError(f"x must be nonnegative, got {x}")
    if x == 0:
        return 0.0
    p = parameter
    root_x = math.sqrt(x)
    log_prefix = (
        (p + 1.0) * math.log(2.0)
        - 0.5 * math.log(2.0 * math.pi)
        - special.gammaln(p)
    )
    logs: List[np.ndarray] = []
    signs: List[np.ndarray] = []
    batch = 32
    start = 0
    best = -np.inf
    while True:
        n = np.arange(start, start + batch, dtype=float)
        ys = (2.0 * n + p) / root_x
        log_g, sign = _log_g(p, ys, cfg, integral)
        log_terms = (
            special.gammaln(n + p)
            - special.gammaln(n + 1.0)
            - p * np.log(2.0 * n + p)
            + log_g
        )
        logs.append(log_terms)
        signs.append(sign)
        best = max(best, float(log_terms.max()))
        if log_terms[-1] < best - _NEGLIGIBLE:
            break
        start += batch
        if start >= cfg.outer_terms:
            partial = _signed_total(log_prefix, logs, signs)
            raise ConvergenceError(
                f"Distribution series of S^{p} at x = {x}", partial, start
            )
        batch = min(2 * batch, 1024)
    value = _signed_total(log_prefix, logs, signs)
    return min(max(value, 0.0), 1.0)


def _signed_total(
    log_prefix: float, logs: List[np.ndarray], signs: List[np.ndarray]
) -> float:
    log_sum, sign = special.logsumexp(
        np.concatenate(logs), b=np.concatenate(signs), return_sign=True
    )
    return float(sign * math.exp(log_prefix + log_sum))


def leading_cdf_left(parameter: float, x: float) -> float:
    """Leading small-``x`` form of the distribution function of ``S^P``."""
    p = parameter
    log_value = (
        -0.5 * math.log(math.pi)
        + (p + 0.5) * math.log(2.0)
        + (p - 1.0) * math.log(p)
        + (0.5 - p) * math.log(x)
        - p * p / (2.0 * x)
    )
    return math.exp(log_value)


def leading_tail_form(parameter: float, u: float) -> float:
    """Asymptotic quantile of ``S^P`` at ``u``.

    Below one half this is the left-tail form, above it the right-tail
    gamma-matched form.
    """
    if not 0.0 < u < 1.0:
        raise InvalidArgumentError(f"u must lie in (0, 1), got {u}")
    if u < 0.5:
        kind = ScalingKind.RECIPROCAL_LOG_LEFT
    else:
        kind = ScalingKind.GAMMA_LOG_RIGHT
    return float(scale_u(kind, u, parameter))


def gamma_match(parameter: float) -> Tuple[float, float]:
    """Shape and rate of the gamma law matching the right tail of
    ``S^P``."""
    return 2.5 * parameter, 7.5


def _initial_guess(parameter: float, u: float) -> float:
    guess = leading_tail_form(parameter, u)
    if math.isfinite(guess) and guess > 0:
        return guess
    return parameter / 3.0


def invert_cdf(
    parameter: float, u: float, cfg: OracleConfig = DEFAULT_ORACLE
) -> float:
    """Quantile of ``S^P`` at ``u`` by root finding on `cdf_sp`.

    A bracket is grown geometrically around the asymptotic guess and the
    root is found with Brent's method.

    Raises
    ------
    hestonsim.exceptions.InversionFailureError
        No bracket within 200 expansions, or the root misses ``u`` by more
        than ``cfg.root_tol``.
    """
    if not config.clip_lower <= u <= config.clip_upper:
        raise InvalidArgumentError(f"u out of range: {u!r}")

    def gap(x: float) -> float:
        return cdf_sp(parameter, x, cfg) - u

    guess = _initial_guess(parameter, u)
    low, high = guess / 1.5, guess * 1.5
    for _ in range(200):
        if gap(low) < 0:
            break
        low /= 2.0
    else:
        raise InversionFailureError(f"No lower bracket for u = {u!r}")
    for _ in range(200):
        if gap(high) > 0:
            break
        high *= 2.0
    else:
        raise InversionFailureError(f"No upper bracket for u = {u!r}")
    root = optimize.brentq(
        gap, low, high, xtol=1e-300, rtol=4.0 * np.finfo(float).eps
    )
    if abs(gap(root)) > cfg.root_tol:
        raise InversionFailureError(
            f"Root {root!r} misses u = {u!r} by {gap(root)!r}"
        )
    return float(root)


def quantile_function(
    parameter: float, cfg: OracleConfig = DEFAULT_ORACLE
) -> Callable[[float], float]:
    """The oracle quantile of ``S^P`` as a function of ``u``."""

    def quantile(u: float) -> float:
        return invert_cdf(parameter, u, cfg)

    return quantile


def fit_chebyshev(
    target: Callable[[np.ndarray], np.ndarray], degree: int
) -> np.ndarray:
    """Chebyshev coefficients of ``target`` on ``[-1, 1]``.

    The fit interpolates at the ``degree + 1`` Chebyshev points of the first
    kind.  The constant coefficient is doubled to match the halved-constant
    convention of `hestonsim.specfun.clenshaw_eval`.
    """
    if not 0 <= degree <= 40:
        raise InvalidArgumentError(f"Degree must lie in [0, 40]: {degree}")
    coeffs = chebyshev.chebinterpolate(target, degree)
    coeffs[0] *= 2.0
    return coeffs


def _regime_target(
    table: InverseCdfTable,
    regime: RegimeSpec,
    quantile: Callable[[float], float],
) -> Callable[[np.ndarray], np.ndarray]:
    p = table.parameter

    def target(z: np.ndarray) -> np.ndarray:
        scaled = (np.asarray(z) - regime.k2) / regime.k1
        u = np.asarray(
            unscale_u(
                regime.scaling_kind,
                scaled,
                p,
                anchor=table.anchor,
                u_right=regime.u_right,
                gamma_constant=regime.gamma_constant,
            )
        )
        values = np.array([quantile(float(ui)) for ui in np.atleast_1d(u)])
        if table.standardized:
            values = (values - p / 3.0) / math.sqrt(2.0 * p / 45.0)
        if regime.scaling_kind.is_product:
            values = values / np.atleast_1d(scaled)
        return values.reshape(np.shape(z))

    return target


@dataclass
class RegenerationResult:
    """A refitted table and how far it moved from the shipped one."""

    table: InverseCdfTable
    max_deviation: float
    report: List[RegimeValidation] = field(default_factory=list)


def regenerate_table(
    table: InverseCdfTable,
    cfg: Optional[OracleConfig] = None,
    grid_size: int = 200,
) -> RegenerationResult:
    """Refit a small-``P`` table on its own regime plan.

    Each regime keeps its boundaries, scaling and affine map; only the
    coefficients are recomputed from oracle quantiles.  The result is
    compared with the input table on the audit grid.

    Raises
    ------
    hestonsim.exceptions.InvalidArgumentError
        The table's parameter has no oracle (large ``P``).
    """
    if table.parameter > 50:
        raise InvalidArgumentError(
            f"No oracle for {table.base_id} (P = {table.parameter})"
        )
    if cfg is None:
        cfg = OracleConfig(switch_const=table.switch_constant)
    quantile = quantile_function(table.parameter, cfg)
    regimes = []
    for regime in table.regimes:
        coeffs = fit_chebyshev(
            _regime_target(table, regime, quantile), regime.degree
        )
        regimes.append(
            replace(regime, coefficients=tuple(coeffs.tolist()), text={})
        )
    text = {k: v for k, v in table.text.items() if k == "parameter"}
    fresh = replace(table, regimes=tuple(regimes), text=text)
    grid = (np.arange(grid_size) + 0.5) / grid_size
    deviation = np.abs(
        np.asarray(fresh.variates(grid)) - np.asarray(table.variates(grid))
    )
    report = validation_report(fresh, quantile, grid_size)
    return RegenerationResult(
        table=fresh, max_deviation=float(deviation.max()), report=report
    )


@dataclass
class LargePCheck:
    """Moments and Laplace transforms of draws of ``S^P`` for large ``P``.

    The draws are standardized to ``Z = (S - P/3) / sqrt(2P/45)``.  The
    cumulants of ``S^P`` are ``P (k-1)! (2/pi^2)^k zeta(2k)``, so the exact
    third moment of ``Z`` is ``(16P/945) / (2P/45)^(3/2)``.
    """

    parameter: int
    n: int
    mean: float
    variance: float
    third_moment: float
    third_moment_se: float
    laplace_b: List[float]
    laplace_estimate: List[float]
    laplace_exact: List[float]
    laplace_se: List[float]

    @property
    def exact_third_moment(self) -> float:
        p = float(self.parameter)
        return (16.0 * p / 945.0) / (2.0 * p / 45.0) ** 1.5

    @property
    def passed(self) -> bool:
        """Whether every statistic is within three standard errors."""
        if abs(self.mean) > 3.0 / math.sqrt(self.n):
            return False
        if abs(self.variance - 1.0) > 3.0 * math.sqrt(2.0 / self.n):
            return False
        skew_error = abs(self.third_moment - self.exact_third_moment)
        if skew_error > 3.0 * self.third_moment_se:
            return False
        for est, exact, se in zip(
            self.laplace_estimate, self.laplace_exact, self.laplace_se
        ):
            if abs(est - exact) > 3.0 * se:
                return False
        return True


def statistical_check(
    parameter: int,
    tables: TableSet,
    stream: RngStream,
    n: int = 100_000,
) -> LargePCheck:
    """Check draws of ``S^P`` against its moments and Laplace transform.

    The Laplace transform is probed at ``b = c / sd`` for ``c`` in
    ``{0.5, 1}`` so that the estimator's variance stays moderate for any
    ``P``.
    """
    p = float(parameter)
    sd = math.sqrt(2.0 * p / 45.0)
    draws = np.asarray(sample_s_p(np.full(n, parameter), tables, stream))
    z = (draws - p / 3.0) / sd
    bs, estimates, exacts, errors = [], [], [], []
    for c in (0.5, 1.0):
        b = c / sd
        # Centre on the mean so the exponentials stay near one.
        values = np.exp(-b * (draws - p / 3.0))
        root = math.sqrt(2.0 * b)
        log_exact = -p * math.log(math.sinh(root) / root)
        bs.append(b)
        estimates.append(float(values.mean()))
        exacts.append(math.exp(log_exact + b * p / 3.0))
        errors.append(float(values.std(ddof=1)) / math.sqrt(n))
    return LargePCheck(
        parameter=int(parameter),
        n=n,
        mean=float(z.mean()),
        variance=float(z.var(ddof=1)),
        third_moment=float(np.mean(z**3)),
        third_moment_se=float(np.std(z**3, ddof=1)) / math.sqrt(n),
        laplace_b=bs,
        laplace_estimate=estimates,
        laplace_exact=exacts,
        laplace_se=errors,
    )
