"""Path simulation of the Heston model and Monte Carlo option pricing."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import (
    TYPE_CHECKING,
    Any,
    Callable,
    Dict,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np

from .bridge import (
    BridgeConfig,
    X2Mode,
    conditional_integral_draw,
    exact_moments_q,
    sample_integral_q,
)
from .config import config
from .diagnostics import RunDiagnostics
from .exceptions import InvalidArgumentError
from .models import (
    MomentErrorRow,
    MomentReport,
    PricingReport,
    Product,
    Scheme,
)
from .sampling import CirTransitionParams, RngStream, sample_cir_transition

if TYPE_CHECKING:
    from numpy.typing import ArrayLike
    from structlog.stdlib import BoundLogger

    from .models import HestonParams
    from .tables import TableSet

__all__ = [
    "EulerPath",
    "HestonEngine",
    "default_steps",
    "euler_full_truncation_path",
    "euler_full_truncation_step",
    "exact_step",
]


def exact_step(
    s: ArrayLike,
    v: ArrayLike,
    dt: float,
    params: HestonParams,
    K: int,
    tables: TableSet,
    stream: RngStream,
    x2_mode: X2Mode = X2Mode.DIRECT_INVERSION,
    diagnostics: Optional[RunDiagnostics] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Advance the asset and variance exactly over one step.

    The variance is drawn from its transition law, the integrated variance
    from its conditional law given both endpoints, and the log price from
    the Gaussian law conditional on both.

    Parameters
    ----------
    s : `float` or `numpy.ndarray`
        Current asset prices, all positive.
    v : `float` or `numpy.ndarray`
        Current variances, all nonnegative.
    dt : `float`
        Step length.
    params : `hestonsim.models.HestonParams`
        Model parameters.
    K : `int`
        Truncation level of the conditional integral.
    tables : `hestonsim.tables.TableSet`
        Inverse CDF tables.
    stream : `hestonsim.sampling.RngStream`
        Source of randomness.

    Returns
    -------
    s_next : `numpy.ndarray`
        Asset prices after the step.
    v_next : `numpy.ndarray`
        Variances after the step.

    Raises
    ------
    hestonsim.exceptions.RunawayRejectionError
        The conditional integral exceeded its proposal cap.
    """
    s_arr = np.asarray(s, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    if np.any(s_arr <= 0):
        raise InvalidArgumentError("Asset prices must be positive")
    if np.any(v_arr < 0):
        raise InvalidArgumentError("Variances must be nonnegative")
    transition = CirTransitionParams(
        kappa=params.kappa, theta=params.theta, sigma=params.sigma, dt=dt
    )
    shape = np.broadcast(s_arr, v_arr).shape
    v_start = np.broadcast_to(v_arr, shape)
    v_next = np.asarray(sample_cir_transition(v_start, transition, stream))
    integral = np.asarray(
        conditional_integral_draw(
            v_start,
            v_next,
            dt,
            params,
            K,
            tables,
            stream,
            x2_mode,
            diagnostics,
        )
    )
    kappa, sigma, rho = params.kappa, params.sigma, params.rho
    mean = (
        params.mu * dt
        + rho / sigma * (v_next - v_start - kappa * params.theta * dt)
        + (rho * kappa / sigma - 0.5) * integral
    )
    sd = np.sqrt((1.0 - rho**2) * integral)
    z = stream.generator.standard_normal(shape)
    s_next = s_arr * np.exp(mean + sd * z)
    return s_next, v_next


def euler_full_truncation_step(
    log_s: np.ndarray,
    v: np.ndarray,
    dt: float,
    params: HestonParams,
    stream: RngStream,
) -> Tuple[np.ndarray, np.ndarray]:
    """One full-truncation Euler step of the log price and variance.

    The variance may go negative; only its positive part enters the drift
    and diffusion of both components.
    """
    v_plus = np.maximum(v, 0.0)
    root = np.sqrt(v_plus * dt)
    z1 = stream.generator.standard_normal(v.shape)
    z2 = stream.generator.standard_normal(v.shape)
    rho = params.rho
    log_s = (
        log_s
        + (params.mu - 0.5 * v_plus) * dt
        + root * (rho * z1 + math.sqrt(1.0 - rho**2) * z2)
    )
    v = v + params.kappa * (params.theta - v_plus) * dt
    v = v + params.sigma * root * z1
    return log_s, v


@dataclass
class EulerPath:
    """Result of `euler_full_truncation_path`."""

    s: np.ndarray
    """Terminal asset prices."""

    v: np.ndarray
    """Terminal variances, possibly negative."""

    path: Optional[np.ndarray] = None
    """Asset prices after every step, shape ``(n_steps, n)``, if recorded."""


def euler_full_truncation_path(
    params: HestonParams,
    n_steps: int,
    stream: RngStream,
    size: int = 1,
    record_path: bool = False,
) -> EulerPath:
    """Simulate ``size`` paths to the horizon with ``n_steps`` equal
    full-truncation Euler steps."""
    if n_steps < 1:
        raise InvalidArgumentError("n_steps must be at least 1")
    dt = params.t / n_steps
    log_s = np.full(size, math.log(params.s0))
    v = np.full(size, params.v0)
    path = np.empty((n_steps, size)) if record_path else None
    for i in range(n_steps):
        log_s, v = euler_full_truncation_step(log_s, v, dt, params, stream)
        if path is not None:
            path[i] = np.exp(log_s)
    return EulerPath(s=np.exp(log_s), v=v, path=path)


def default_steps(n_paths: int) -> int:
    """Euler steps to the horizon: the square root of the sample size."""
    return max(1, int(round(math.sqrt(n_paths))))


class _Accumulator:
    """Running sums of a Monte Carlo payoff."""

    def __init__(self) -> None:
        self.n = 0
        self.total = 0.0
        self.total_sq = 0.0

    def add(self, values: np.ndarray) -> None:
        self.n += values.size
        self.total += float(values.sum())
        self.total_sq += float(np.dot(values, values))

    @property
    def mean(self) -> float:
        return self.total / self.n

    @property
    def std_error(self) -> float:
        if self.n < 2:
            return 0.0
        var = (self.total_sq - self.total**2 / self.n) / (self.n - 1)
        return math.sqrt(max(var, 0.0) / self.n)


PayoffFn = Callable[[Iterator[np.ndarray], int], np.ndarray]


class HestonEngine:
    """Monte Carlo pricing of European, Asian and double no-touch options.

    Paths are simulated in chunks of ``chunk_size``; chunk ``i`` draws from
    child ``i`` of the stream seeded with the run's seed, so a given
    configuration and seed always gives the same estimate.

    Parameters
    ----------
    tables : `hestonsim.tables.TableSet`
        Inverse CDF tables for the exact schemes.
    logger : `structlog.stdlib.BoundLogger`
        Logger for run summaries.
    chunk_size : `int`, optional
        Paths per vectorized batch (default ``config.chunk_size``).
    """

    def __init__(
        self,
        tables: TableSet,
        logger: BoundLogger,
        chunk_size: Optional[int] = None,
    ) -> None:
        self.tables = tables
        self.logger = logger
        self.chunk_size = chunk_size or config.chunk_size

    def _chunks(
        self, n_paths: int, seed: int
    ) -> Iterator[Tuple[int, RngStream]]:
        root = RngStream(seed)
        for index, start in enumerate(range(0, n_paths, self.chunk_size)):
            yield min(self.chunk_size, n_paths - start), root.split(index)

    def _walk(
        self,
        params: HestonParams,
        scheme: Scheme,
        K: int,
        n_dates: int,
        substeps: int,
        size: int,
        stream: RngStream,
        diagnostics: RunDiagnostics,
    ) -> Iterator[np.ndarray]:
        """Yield the asset prices at ``n_dates`` equally spaced dates ending
        at the horizon.

        Exact schemes take one step per date; Euler takes ``substeps``.
        """
        date_dt = params.t / n_dates
        if scheme.is_exact:
            s = np.full(size, params.s0)
            v = np.full(size, params.v0)
            for _ in range(n_dates):
                s, v = exact_step(
                    s,
                    v,
                    date_dt,
                    params,
                    K,
                    self.tables,
                    stream,
                    scheme.x2_mode,
                    diagnostics,
                )
                yield s
        else:
            log_s = np.full(size, math.log(params.s0))
            v = np.full(size, params.v0)
            dt = date_dt / substeps
            for _ in range(n_dates):
                for _ in range(substeps):
                    log_s, v = euler_full_truncation_step(
                        log_s, v, dt, params, stream
                    )
                yield np.exp(log_s)

    def _price(
        self,
        product: Product,
        params: HestonParams,
        payoff: PayoffFn,
        n_dates: int,
        n_paths: int,
        scheme: Scheme,
        K: int,
        seed: int,
        steps: Optional[int],
        strike: Optional[float],
        case: Optional[str],
    ) -> PricingReport:
        if n_paths < 1:
            raise InvalidArgumentError("n_paths must be at least 1")
        if K < 0:
            raise InvalidArgumentError("K must be nonnegative")
        total_steps = None
        substeps = 1
        if not scheme.is_exact:
            total_steps = steps or default_steps(n_paths)
            substeps = max(1, int(round(total_steps / n_dates)))
            total_steps = substeps * n_dates
        self.logger.info(
            f"Pricing {product.value} option",
            case=case,
            scheme=scheme.value,
            n_paths=n_paths,
            K=K,
            steps=total_steps,
        )
        start = time.perf_counter()
        diagnostics = RunDiagnostics()
        acc = _Accumulator()
        for size, stream in self._chunks(n_paths, seed):
            prices = self._walk(
                params, scheme, K, n_dates, substeps, size, stream, diagnostics
            )
            acc.add(payoff(prices, size))
        seconds = time.perf_counter() - start
        discount = math.exp(-params.r * params.t)
        report = PricingReport(
            product=product,
            case=case,
            scheme=scheme,
            strike=strike,
            estimate=discount * acc.mean,
            std_error=discount * acc.std_error,
            n_paths=n_paths,
            K=K,
            steps=total_steps,
            seconds=seconds,
            **self._diagnostic_fields(scheme, diagnostics),
        )
        self.logger.info(
            f"Priced {product.value} option",
            case=case,
            scheme=scheme.value,
            estimate=report.estimate,
            std_error=report.std_error,
            seconds=round(seconds, 3),
        )
        if diagnostics.clipped_uniforms:
            self.logger.warning(
                "Uniforms clipped before table lookup",
                count=diagnostics.clipped_uniforms,
            )
        return report

    @staticmethod
    def _diagnostic_fields(
        scheme: Scheme, diagnostics: RunDiagnostics
    ) -> Dict[str, Any]:
        if not scheme.is_exact:
            return {}
        fields: Dict[str, Any] = {
            "proposals_mean": diagnostics.proposals_mean,
            "clipped_uniforms": diagnostics.clipped_uniforms,
            "max_level_count": diagnostics.max_level_count,
        }
        if scheme.x2_mode is X2Mode.DIRECT_INVERSION:
            fields["h"] = diagnostics.h
            fields["h_rounded"] = diagnostics.h_rounded
            fields["h_relative_bias"] = diagnostics.h_relative_bias
        return fields

    def price_european_call(
        self,
        params: HestonParams,
        strike: float,
        n_paths: int,
        scheme: Scheme = Scheme.EXACT_DIRECT,
        K: int = 1,
        seed: int = 0,
        steps: Optional[int] = None,
        case: Optional[str] = None,
    ) -> PricingReport:
        """Price a European call.  The exact schemes take a single step to
        the horizon."""
        if strike < 0:
            raise InvalidArgumentError("Strike must be nonnegative")

        def payoff(prices: Iterator[np.ndarray], size: int) -> np.ndarray:
            terminal = np.empty(size)
            for s in prices:
                terminal = s
            return np.maximum(terminal - strike, 0.0)

        return self._price(
            Product.EUROPEAN,
            params,
            payoff,
            1,
            n_paths,
            scheme,
            K,
            seed,
            steps,
            strike,
            case,
        )

    def price_asian_call(
        self,
        params: HestonParams,
        strike: float,
        n_fixings: Optional[int],
        n_paths: int,
        scheme: Scheme = Scheme.EXACT_DIRECT,
        K: int = 1,
        seed: int = 0,
        steps: Optional[int] = None,
        case: Optional[str] = None,
    ) -> PricingReport:
        """Price an arithmetic-average Asian call.

        The average is over ``n_fixings`` equally spaced fixings ending at
        the horizon; the default is one fixing per year.
        """
        if n_fixings is None:
            n_fixings = max(1, int(round(params.t)))
        if n_fixings < 1:
            raise InvalidArgumentError("n_fixings must be at least 1")
        if strike < 0:
            raise InvalidArgumentError("Strike must be nonnegative")

        def payoff(prices: Iterator[np.ndarray], size: int) -> np.ndarray:
            total = np.zeros(size)
            for s in prices:
                total += s
            return np.maximum(total / n_fixings - strike, 0.0)

        return self._price(
            Product.ASIAN,
            params,
            payoff,
            n_fixings,
            n_paths,
            scheme,
            K,
            seed,
            steps,
            strike,
            case,
        )

    def price_double_no_touch(
        self,
        params: HestonParams,
        lower: float,
        upper: float,
        steps_per_year: int,
        n_paths: int,
        scheme: Scheme = Scheme.EXACT_DIRECT,
        K: int = 1,
        seed: int = 0,
        steps: Optional[int] = None,
        case: Optional[str] = None,
    ) -> PricingReport:
        """Price a digital double no-touch option.

        The option pays one if the asset stays strictly between the
        barriers at every monitoring date, ``steps_per_year`` per year.
        ``upper`` may be ``math.inf``.
        """
        if not 0 <= lower < params.s0 < upper:
            raise InvalidArgumentError(
                f"Barriers must bracket s0 = {params.s0}"
            )
        if steps_per_year < 1:
            raise InvalidArgumentError("steps_per_year must be at least 1")
        n_dates = max(1, int(round(steps_per_year * params.t)))

        def payoff(prices: Iterator[np.ndarray], size: int) -> np.ndarray:
            alive = np.ones(size, dtype=bool)
            for s in prices:
                alive &= (s > lower) & (s < upper)
            return alive.astype(float)

        return self._price(
            Product.BARRIER,
            params,
            payoff,
            n_dates,
            n_paths,
            scheme,
            K,
            seed,
            steps,
            None,
            case,
        )

    def moment_error_report(
        self,
        params: HestonParams,
        v_t_list: Sequence[float],
        K_list: Sequence[int],
        n_paths: int,
        seed: int = 0,
        t: Optional[float] = None,
        scheme: Scheme = Scheme.EXACT_DIRECT,
        case: str = "",
    ) -> MomentReport:
        """Compare sample and exact raw moments of the conditional
        integral.

        For every end variance and truncation level, ``n_paths`` draws of
        the integrated variance ``int V_s ds`` from ``v0`` to ``v_t`` over
        ``t`` (default: the horizon) are compared with the moments obtained
        by differentiating the Laplace transform of the rescaled bridge
        integral, scaled by ``(4 / sigma^2) ** order``.  Each (``v_t``,
        ``K``) pair uses its own child stream.
        """
        if not scheme.is_exact:
            raise InvalidArgumentError("Moments need an exact scheme")
        if any(v < 0 for v in v_t_list):
            raise InvalidArgumentError("End variances must be nonnegative")
        horizon = params.t if t is None else t
        scale = 4.0 / params.sigma**2
        orders = np.arange(1, 5)
        root = RngStream(seed)
        rows: List[MomentErrorRow] = []
        diagnostics = RunDiagnostics()
        index = 0
        for v_t in v_t_list:
            for K in K_list:
                cfg = BridgeConfig.from_heston(
                    params, params.v0, v_t, horizon, K, scheme.x2_mode
                )
                exact = np.asarray(exact_moments_q(cfg, 4)) * scale**orders
                sums = np.zeros(4)
                sums_sq = np.zeros(4)
                stream = root.split(index)
                index += 1
                for start in range(0, n_paths, self.chunk_size):
                    size = min(self.chunk_size, n_paths - start)
                    draws, _ = sample_integral_q(
                        cfg, self.tables, stream, size, diagnostics
                    )
                    values = scale * np.asarray(draws)
                    powers = values[None, :] ** orders[:, None]
                    sums += powers.sum(axis=1)
                    sums_sq += (powers**2).sum(axis=1)
                for order in range(1, 5):
                    mean = sums[order - 1] / n_paths
                    var = sums_sq[order - 1] / n_paths - mean**2
                    se = math.sqrt(max(var, 0.0) / max(n_paths - 1, 1))
                    rows.append(
                        MomentErrorRow(
                            case=case,
                            v_t=v_t,
                            K=K,
                            order=order,
                            sample_moment=mean,
                            exact_moment=float(exact[order - 1]),
                            abs_error=abs(mean - float(exact[order - 1])),
                            three_se=3.0 * se,
                        )
                    )
                self.logger.info(
                    "Moment errors computed",
                    case=case,
                    v_t=v_t,
                    K=K,
                    n_paths=n_paths,
                )
        tau = params.sigma**2 * horizon / 4.0
        h = params.delta / 2.0
        h_rounded = diagnostics.h_rounded or h
        return MomentReport(
            rows=rows,
            x2_mean=tau**2 * h / 3.0,
            x2_mean_rounded=tau**2 * h_rounded / 3.0,
        )
