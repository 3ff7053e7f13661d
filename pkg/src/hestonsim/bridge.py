"""The integrated variance of a CIR bridge.

Conditional on its endpoints, the time integral ``I`` of a squared Bessel
bridge is the sum of three independent parts: ``X1`` (Poisson mixtures of
``S^P``), ``X2`` (a ``Y2^h`` variate) and a Bessel-distributed number of
``Z`` variates.  The integral of the CIR bridge follows from it by
acceptance-rejection with acceptance probability ``exp(-q^2 Y / 2)``.

All samplers are vectorized over the bridge endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .components import (
    sample_c_series,
    sample_s_p,
    sample_y2,
    sample_z_prime,
)
from .config import config
from .exceptions import (
    InternalConsistencyError,
    InvalidArgumentError,
    NumericFailureError,
    RunawayRejectionError,
)
from .sampling import Size, sample_bessel_count, sample_poisson
from .specfun import log_bessel_i

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .diagnostics import RunDiagnostics
    from .models import HestonParams
    from .sampling import RngStream
    from .tables import TableSet

__all__ = [
    "BridgeConfig",
    "X2Mode",
    "acceptance_factor",
    "bessel_pgf",
    "conditional_integral_draw",
    "exact_cumulants_q",
    "exact_moments_q",
    "laplace_fp",
    "laplace_fq",
    "laplace_x1",
    "laplace_x2",
    "laplace_z",
    "mean_integral_p",
    "remainder_moments",
    "sample_integral_p",
    "sample_integral_q",
    "sample_x1",
    "sample_x2",
    "sample_z",
]

FloatOrArray = Union[float, np.ndarray]

_DIFF_STEPS = (1e-3, 5e-4, 2.5e-4)
"""Central-difference steps for the exact moments, in units of 1/mean."""


class X2Mode(Enum):
    """How the ``X2`` component is drawn."""

    DIRECT_INVERSION = "direct"
    """One ``Y2^h`` draw from the tables."""

    TRUNCATION_BASELINE = "gamma-baseline"
    """Truncated gamma series per level.  Approximate."""


@dataclass(frozen=True)
class BridgeConfig:
    """A squared Bessel bridge (or a batch of them with shared ``tau``).

    ``a0`` and ``a_tau`` may be arrays; every other field is shared.
    """

    tau: float
    """Rescaled time ``sigma^2 t / 4``."""

    a0: FloatOrArray
    """Start of the bridge."""

    a_tau: FloatOrArray
    """End of the bridge."""

    delta: float
    """Degrees of freedom."""

    q: float
    """Measure-change rate ``2 kappa / sigma^2``."""

    K: int = 1
    """Outer truncation level."""

    x2_mode: X2Mode = X2Mode.DIRECT_INVERSION

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise InvalidArgumentError("tau must be positive")
        if not self.delta > 0:
            raise InvalidArgumentError("delta must be positive")
        if self.q < 0:
            raise InvalidArgumentError("q must be nonnegative")
        if self.K < 0:
            raise InvalidArgumentError("K must be nonnegative")
        if np.any(np.asarray(self.a0) < 0) or np.any(
            np.asarray(self.a_tau) < 0
        ):
            raise InvalidArgumentError("Bridge endpoints must be >= 0")

    @classmethod
    def from_heston(
        cls,
        params: HestonParams,
        v0: ArrayLike,
        vt: ArrayLike,
        dt: float,
        K: int = 1,
        x2_mode: X2Mode = X2Mode.DIRECT_INVERSION,
    ) -> BridgeConfig:
        """The bridge of the variance over a step of length ``dt``."""
        if not dt > 0:
            raise InvalidArgumentError("Step length must be positive")
        sigma2 = params.sigma**2
        return cls(
            tau=sigma2 * dt / 4.0,
            a0=np.asarray(v0, dtype=float)[()],
            a_tau=np.asarray(vt, dtype=float)[()],
            delta=4.0 * params.kappa * params.theta / sigma2,
            q=2.0 * params.kappa / sigma2,
            K=K,
            x2_mode=x2_mode,
        )

    @property
    def nu(self) -> float:
        return self.delta / 2.0 - 1.0

    @property
    def h(self) -> float:
        return self.delta / 2.0

    @property
    def shape(self) -> Tuple[int, ...]:
        return np.broadcast(self.a0, self.a_tau).shape

    @property
    def bessel_z(self) -> FloatOrArray:
        """Argument ``sqrt(a0 a_tau) / tau`` of the Bessel count."""
        return np.sqrt(np.asarray(self.a0) * self.a_tau) / self.tau

    def flat(self, size: Size = None) -> BridgeConfig:
        """This config with one-dimensional endpoint arrays."""
        shape = _out_shape(self, size)
        a0 = np.broadcast_to(self.a0, shape).ravel().astype(float)
        a_tau = np.broadcast_to(self.a_tau, shape).ravel().astype(float)
        return replace(self, a0=a0, a_tau=a_tau)

    def take(self, index: np.ndarray) -> BridgeConfig:
        """Select entries of a flat config."""
        return replace(
            self,
            a0=np.asarray(self.a0)[index],
            a_tau=np.asarray(self.a_tau)[index],
        )

    def summary(self) -> Dict[str, Any]:
        a0 = np.asarray(self.a0)
        a_tau = np.asarray(self.a_tau)
        return {
            "tau": self.tau,
            "delta": self.delta,
            "q": self.q,
            "K": self.K,
            "a0": float(a0.ravel()[0]) if a0.size == 1 else "array",
            "a_tau": float(a_tau.ravel()[0]) if a_tau.size == 1 else "array",
        }


def _out_shape(cfg: BridgeConfig, size: Size) -> Tuple[int, ...]:
    if size is None:
        return cfg.shape
    extra = (size,) if isinstance(size, int) else tuple(size)
    return np.broadcast_shapes(cfg.shape, extra)


def _shaped(values: np.ndarray, shape: Tuple[int, ...]) -> FloatOrArray:
    if shape == ():
        return float(values[0])
    return values.reshape(shape)


def remainder_moments(
    cfg: BridgeConfig, K: Optional[int] = None
) -> Tuple[FloatOrArray, FloatOrArray, float, float]:
    """Mean and variance of the parts of ``X1`` and ``X2`` beyond level
    ``K``.

    Returns
    -------
    moments : `tuple`
        ``(E1, Var1, E2, Var2)``.
    """
    k = cfg.K if K is None else K
    if k < 0:
        raise InvalidArgumentError("K must be nonnegative")
    s = np.asarray(cfg.a0) + cfg.a_tau
    tau = cfg.tau
    e1 = s * tau / (6.0 * 2.0**k)
    var1 = s * tau**3 / (90.0 * 8.0**k)
    e2 = cfg.delta * tau**2 / (6.0 * 4.0**k)
    var2 = cfg.delta * tau**4 / (45.0 * 16.0**k)
    return e1[()], var1[()], e2, var2


def _gamma_match(
    mean: np.ndarray, var: np.ndarray, stream: RngStream
) -> np.ndarray:
    """Gamma variates with the given means and variances; zero where the
    mean is zero."""
    mean = np.asarray(mean, dtype=float)
    var = np.broadcast_to(var, mean.shape)
    out = np.zeros(mean.shape)
    live = mean > 0
    if np.any(live):
        m, v = mean[live], var[live]
        out[live] = stream.generator.standard_gamma(m * m / v) * (v / m)
    return out


def sample_x1(
    cfg: BridgeConfig,
    tables: TableSet,
    stream: RngStream,
    size: Size = None,
    diagnostics: Optional[RunDiagnostics] = None,
) -> FloatOrArray:
    """Draw ``X1`` truncated at level ``K`` plus a moment-matched gamma
    tail."""
    shape = _out_shape(cfg, size)
    flat = cfg.flat(size)
    s = np.asarray(flat.a0) + flat.a_tau
    tau = cfg.tau
    total = np.zeros(s.shape)
    for n in range(cfg.K + 1):
        counts = np.asarray(
            sample_poisson(s * 2.0 ** (n - 1) / tau, stream)
        )
        if diagnostics is not None and counts.size:
            diagnostics.record_level_count(int(counts.max()))
        if counts.any():
            draws = sample_s_p(counts, tables, stream, diagnostics)
            total += tau**2 / 4.0**n * np.asarray(draws)
    e1, var1, _, _ = remainder_moments(flat)
    total += _gamma_match(np.asarray(e1), np.asarray(var1), stream)
    return _shaped(total, shape)


def sample_x2(
    cfg: BridgeConfig,
    tables: TableSet,
    stream: RngStream,
    size: Size = None,
    diagnostics: Optional[RunDiagnostics] = None,
) -> FloatOrArray:
    """Draw ``X2``.

    With `X2Mode.DIRECT_INVERSION` this is ``tau^2 Y2^h`` with ``h``
    rounded.  The truncation baseline keeps levels ``1..K`` as gamma series
    of ``config.baseline_inner_terms`` terms each and matches the rest with
    one gamma variate.
    """
    shape = _out_shape(cfg, size)
    n = int(np.prod(shape, dtype=np.int64))
    tau2 = cfg.tau**2
    if cfg.x2_mode is X2Mode.DIRECT_INVERSION:
        draws = sample_y2(cfg.h, tables, stream, n, diagnostics)
        return _shaped(tau2 * np.asarray(draws), shape)
    total = np.zeros(n)
    for level in range(1, cfg.K + 1):
        c = sample_c_series(
            cfg.h, config.baseline_inner_terms, stream, n, gamma_tail=True
        )
        total += tau2 / 4.0**level * c
    _, _, e2, var2 = remainder_moments(cfg)
    total += _gamma_match(np.full(n, e2), np.full(n, var2), stream)
    return _shaped(total, shape)


def sample_z(
    cfg: BridgeConfig,
    tables: TableSet,
    stream: RngStream,
    size: Size = None,
    diagnostics: Optional[RunDiagnostics] = None,
) -> FloatOrArray:
    """Draw ``Z = tau^2 Z'``."""
    draws = sample_z_prime(tables, stream, size, diagnostics)
    return cfg.tau**2 * draws


def _sum_of_z(
    cfg: BridgeConfig,
    counts: np.ndarray,
    tables: TableSet,
    stream: RngStream,
    diagnostics: Optional[RunDiagnostics],
) -> np.ndarray:
    total = int(counts.sum())
    if total == 0:
        return np.zeros(counts.shape)
    draws = np.atleast_1d(sample_z(cfg, tables, stream, total, diagnostics))
    owner = np.repeat(np.arange(counts.size), counts)
    return np.bincount(owner, weights=draws, minlength=counts.size)


def _sample_integral_p_flat(
    flat: BridgeConfig,
    tables: TableSet,
    stream: RngStream,
    diagnostics: Optional[RunDiagnostics],
) -> np.ndarray:
    x1 = np.atleast_1d(sample_x1(flat, tables, stream, None, diagnostics))
    n = x1.size
    x2 = np.atleast_1d(sample_x2(flat, tables, stream, n, diagnostics))
    counts = np.atleast_1d(
        sample_bessel_count(flat.nu, flat.bessel_z, stream)
    )
    return x1 + x2 + _sum_of_z(flat, counts, tables, stream, diagnostics)


def sample_integral_p(
    cfg: BridgeConfig,
    tables: TableSet,
    stream: RngStream,
    size: Size = None,
    diagnostics: Optional[RunDiagnostics] = None,
) -> FloatOrArray:
    """Draw the integral of the squared Bessel bridge."""
    shape = _out_shape(cfg, size)
    values = _sample_integral_p_flat(
        cfg.flat(size), tables, stream, diagnostics
    )
    return _shaped(values, shape)


def _log_sinhc(x: np.ndarray) -> np.ndarray:
    """``log(sinh(x) / x)`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = x + np.log1p(-np.exp(-2.0 * x)) - math.log(2.0) - np.log(x)
    small = x * x / 6.0 - x**4 / 180.0
    return np.where(x < 1e-3, small, big)


def acceptance_factor(cfg: BridgeConfig) -> FloatOrArray:
    """The factor ``L``: the mean number of proposals per accepted draw.

    Computed in log space.  For ``a0 a_tau = 0`` the Bessel ratio is
    replaced by its limit ``(sinh(q tau) / (q tau))**nu``.

    Raises
    ------
    hestonsim.exceptions.InternalConsistencyError
        ``L`` came out below one.
    """
    x = cfg.q * cfg.tau
    if x == 0:
        return np.ones(cfg.shape)[()]
    s = np.asarray(cfg.a0) + cfg.a_tau
    w = np.sqrt(np.asarray(cfg.a0) * cfg.a_tau)
    log_sinhc = float(_log_sinhc(np.asarray(x)))
    x_coth = x / math.tanh(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = log_bessel_i(cfg.nu, w / cfg.tau) - log_bessel_i(
            cfg.nu, cfg.q * w / math.sinh(x)
        )
    ratio = np.where(w > 0, ratio, cfg.nu * log_sinhc)
    log_l = log_sinhc + s / (2.0 * cfg.tau) * (x_coth - 1.0) + ratio
    factor = np.exp(log_l)
    if np.any(factor < 1.0 - 1e-9):
        raise InternalConsistencyError(
            f"Acceptance factor {np.min(factor)!r} below 1 for"
            f" {cfg.summary()}"
        )
    return factor[()]


def sample_integral_q(
    cfg: BridgeConfig,
    tables: TableSet,
    stream: RngStream,
    size: Size = None,
    diagnostics: Optional[RunDiagnostics] = None,
    cap: Optional[int] = None,
) -> Tuple[FloatOrArray, Union[int, np.ndarray]]:
    """Draw the integral of the CIR bridge by acceptance-rejection.

    Proposals are squared Bessel bridge integrals ``Y``; each is accepted
    with probability ``exp(-q^2 Y / 2)``.

    Returns
    -------
    value : `float` or `numpy.ndarray`
        Accepted draws.
    proposals : `int` or `numpy.ndarray`
        Proposals used for each accepted draw.

    Raises
    ------
    hestonsim.exceptions.RunawayRejectionError
        Some draw needed more than ``cap`` proposals (default
        ``config.rejection_cap``).
    """
    cap = config.rejection_cap if cap is None else cap
    shape = _out_shape(cfg, size)
    flat = cfg.flat(size)
    n = np.asarray(flat.a0).size
    values = np.zeros(n)
    proposals = np.zeros(n, dtype=np.int64)
    pending = np.arange(n)
    half_q2 = 0.5 * cfg.q**2
    while pending.size:
        sub = flat.take(pending)
        y = _sample_integral_p_flat(sub, tables, stream, diagnostics)
        proposals[pending] += 1
        u = np.atleast_1d(stream.uniforms(pending.size))
        accept = u <= np.exp(-half_q2 * y)
        values[pending[accept]] = y[accept]
        pending = pending[~accept]
        if pending.size and proposals[pending].max() >= cap:
            left = np.flatnonzero(~accept)
            worst = sub.take(left[[int(np.argmax(proposals[pending]))]])
            raise RunawayRejectionError(
                float(np.asarray(acceptance_factor(worst)).ravel()[0]),
                int(proposals[pending].max()),
                worst.summary(),
            )
    if diagnostics is not None:
        diagnostics.record_proposals(int(proposals.sum()), n)
    if shape == ():
        return float(values[0]), int(proposals[0])
    return values.reshape(shape), proposals.reshape(shape)


def _x_terms(
    b: float, tau: float
) -> Tuple[float, float, float]:
    """``x / sinh x``, ``x coth x`` and ``sqrt(2b) / sinh x`` with
    ``x = sqrt(2b) tau``, continued to ``b < 0`` through the trigonometric
    forms."""
    if b == 0:
        return 1.0, 1.0, 1.0 / tau
    r = math.sqrt(2.0 * abs(b))
    x = r * tau
    if b > 0:
        if x < 1e-4:
            x2 = x * x
            return 1.0 - x2 / 6.0, 1.0 + x2 / 3.0, (1.0 - x2 / 6.0) / tau
        return x / math.sinh(x), x / math.tanh(x), r / math.sinh(x)
    if x >= math.pi:
        raise InvalidArgumentError(
            f"Transform is singular at b = {b!r} for tau = {tau!r}"
        )
    return x / math.sin(x), x / math.tan(x), r / math.sin(x)


def laplace_x1(cfg: BridgeConfig, b: float) -> FloatOrArray:
    """Laplace transform of ``X1`` at ``b >= 0``."""
    _, x_coth, _ = _x_terms(b, cfg.tau)
    s = np.asarray(cfg.a0) + cfg.a_tau
    return np.exp(s / (2.0 * cfg.tau) * (1.0 - x_coth))[()]


def laplace_x2(
    cfg: BridgeConfig, b: float, h: Optional[float] = None
) -> float:
    """Laplace transform of ``X2`` at ``b >= 0`` (for ``h``, by default the
    bridge's own ``delta / 2``)."""
    ratio, _, _ = _x_terms(b, cfg.tau)
    return ratio ** (cfg.h if h is None else h)


def laplace_z(cfg: BridgeConfig, b: float) -> float:
    """Laplace transform of one ``Z`` component at ``b >= 0``."""
    ratio, _, _ = _x_terms(b, cfg.tau)
    return ratio**2


def bessel_pgf(nu: float, z: ArrayLike, s: float) -> FloatOrArray:
    """Probability generating function ``E[s^eta]`` of ``Bessel(nu, z)``."""
    za = np.asarray(z, dtype=float)
    if s <= 0:
        raise InvalidArgumentError("s must be positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = log_bessel_i(nu, za * math.sqrt(s)) - log_bessel_i(
            nu, za
        )
    value = np.exp(-0.5 * nu * math.log(s) + log_ratio)
    return np.where(za > 0, value, 1.0)[()]


def _log_laplace_fp(cfg: BridgeConfig, b: float) -> FloatOrArray:
    ratio, x_coth, scale = _x_terms(b, cfg.tau)
    s = np.asarray(cfg.a0) + cfg.a_tau
    w = np.sqrt(np.asarray(cfg.a0) * cfg.a_tau)
    log_ratio = math.log(ratio)
    with np.errstate(divide="ignore", invalid="ignore"):
        bessel = log_bessel_i(cfg.nu, w * scale) - log_bessel_i(
            cfg.nu, w / cfg.tau
        )
    bessel = np.where(w > 0, bessel, cfg.nu * log_ratio)
    return (log_ratio + s / (2.0 * cfg.tau) * (1.0 - x_coth) + bessel)[()]


def laplace_fp(cfg: BridgeConfig, b: float) -> FloatOrArray:
    """Laplace transform of the squared Bessel bridge integral."""
    return np.exp(_log_laplace_fp(cfg, b))[()]


def laplace_fq(cfg: BridgeConfig, b: float) -> FloatOrArray:
    """Laplace transform of the CIR bridge integral, from the shift
    ``L_Q(b) = L_P(b + q^2/2) / L_P(q^2/2)``."""
    shift = 0.5 * cfg.q**2
    log_value = _log_laplace_fp(cfg, b + shift) - _log_laplace_fp(cfg, shift)
    return np.exp(log_value)[()]


def mean_integral_p(cfg: BridgeConfig) -> FloatOrArray:
    """Exact mean of the squared Bessel bridge integral."""
    tau = cfg.tau
    s = np.asarray(cfg.a0) + cfg.a_tau
    z = np.asarray(cfg.bessel_z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = 0.5 * z * np.exp(
            log_bessel_i(cfg.nu + 1.0, z) - log_bessel_i(cfg.nu, z)
        )
    eta = np.where(z > 0, eta, 0.0)
    mean = s * tau / 3.0 + cfg.h * tau**2 / 3.0 + eta * 2.0 * tau**2 / 3.0
    return mean[()]


def _difference_quotients(
    g: Dict[int, float], h: float
) -> List[float]:
    d1 = (g[1] - g[-1]) / (2.0 * h)
    d2 = (g[1] - 2.0 * g[0] + g[-1]) / h**2
    d3 = (g[2] - 2.0 * g[1] + 2.0 * g[-1] - g[-2]) / (2.0 * h**3)
    d4 = (g[2] - 4.0 * g[1] + 6.0 * g[0] - 4.0 * g[-1] + g[-2]) / h**4
    return [d1, d2, d3, d4]


def exact_cumulants_q(cfg: BridgeConfig, order: int = 4) -> List[float]:
    """Cumulants of the CIR bridge integral, orders ``1..order``.

    Derivatives of ``log L_Q`` at zero are taken by central differences at
    three step sizes and combined by two rounds of Richardson extrapolation.

    Raises
    ------
    hestonsim.exceptions.NumericFailureError
        A transform value or derivative is not finite.
    """
    if not 1 <= order <= 4:
        raise InvalidArgumentError("Order must lie in 1..4")
    if cfg.shape != ():
        raise InvalidArgumentError("Exact moments need scalar endpoints")
    tau = cfg.tau
    m0 = tau * (float(cfg.a0) + float(cfg.a_tau)) / 3.0
    m0 += tau**2 * (cfg.h + 2.0) / 3.0
    shift = 0.5 * cfg.q**2
    base = float(_log_laplace_fp(cfg, shift))
    estimates = []
    steps: Dict[str, Any] = {"base": base}
    for c in _DIFF_STEPS:
        h = c / m0
        g = {
            j: float(_log_laplace_fp(cfg, shift + j * h)) - base
            for j in (-2, -1, 1, 2)
        }
        g[0] = 0.0
        steps[f"h={h:.3e}"] = g
        estimates.append(_difference_quotients(g, h))
    first = [
        [(4.0 * fine - coarse) / 3.0 for coarse, fine in zip(a, b)]
        for a, b in zip(estimates, estimates[1:])
    ]
    derivatives = [
        (16.0 * fine - coarse) / 15.0
        for coarse, fine in zip(first[0], first[1])
    ]
    if not all(math.isfinite(d) for d in derivatives) or not math.isfinite(
        base
    ):
        raise NumericFailureError("Non-finite transform derivative", steps)
    return [(-1.0) ** n * d for n, d in enumerate(derivatives, 1)][:order]


def exact_moments_q(cfg: BridgeConfig, order: int = 4) -> List[float]:
    """Raw moments of the CIR bridge integral, orders ``1..order``."""
    k = exact_cumulants_q(cfg, 4)
    m1 = k[0]
    m2 = k[1] + m1**2
    m3 = k[2] + 3.0 * k[1] * m1 + m1**3
    m4 = k[3] + 4.0 * k[2] * m1 + 3.0 * k[1] ** 2 + 6.0 * k[1] * m1**2
    m4 += m1**4
    return [m1, m2, m3, m4][:order]


def conditional_integral_draw(
    v0: ArrayLike,
    vt: ArrayLike,
    dt: float,
    params: HestonParams,
    K: int,
    tables: TableSet,
    stream: RngStream,
    x2_mode: X2Mode = X2Mode.DIRECT_INVERSION,
    diagnostics: Optional[RunDiagnostics] = None,
) -> FloatOrArray:
    """Draw ``int_0^dt V_s ds`` given ``V_0 = v0`` and ``V_dt = vt``.

    This is ``4 / sigma^2`` times the integral of the rescaled bridge.
    """
    if np.any(np.asarray(v0) < 0) or np.any(np.asarray(vt) < 0):
        raise InvalidArgumentError("Variances must be nonnegative")
    cfg = BridgeConfig.from_heston(params, v0, vt, dt, K, x2_mode)
    values, _ = sample_integral_q(cfg, tables, stream, None, diagnostics)
    return 4.0 / params.sigma**2 * values
