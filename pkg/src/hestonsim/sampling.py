"""Seedable random streams and the base variate generators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Tuple, Union

import numpy as np
from scipy import special

from .exceptions import InvalidArgumentError
from .specfun import log_bessel_i

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

__all__ = [
    "CirTransitionParams",
    "RngStream",
    "cir_noncentrality",
    "sample_bessel_count",
    "sample_cir_transition",
    "sample_exponential",
    "sample_gamma",
    "sample_normal",
    "sample_poisson",
]

Size = Union[None, int, Tuple[int, ...]]

_INVERSION_LIMIT = 10.0
"""Poisson means below this use sequential inversion."""


class RngStream:
    """A deterministic stream of uniform variates.

    The stream wraps a PCG64 `numpy.random.Generator` seeded from a
    `numpy.random.SeedSequence`.  Child streams made by `split` are keyed by
    their index, so the same parent seed and index always give the same
    child, independently of the order in which children are created.

    A stream has a single owner and must not be shared between threads.

    Parameters
    ----------
    seed : `int` or `numpy.random.SeedSequence`
        A 64-bit integer seed or an existing seed sequence.
    """

    def __init__(self, seed: Union[int, np.random.SeedSequence]) -> None:
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            self._seq = np.random.SeedSequence(seed)
        self._generator = np.random.Generator(np.random.PCG64(self._seq))

    @property
    def generator(self) -> np.random.Generator:
        """The underlying generator, for library distributions."""
        return self._generator

    def split(self, child_index: int) -> RngStream:
        """Return the child stream with the given index."""
        child = np.random.SeedSequence(
            entropy=self._seq.entropy,
            spawn_key=tuple(self._seq.spawn_key) + (int(child_index),),
            pool_size=self._seq.pool_size,
        )
        return RngStream(child)

    def next_uniform(self) -> float:
        """Return one uniform variate in the open interval (0, 1)."""
        return float(self.uniforms(None))

    def uniforms(self, size: Size) -> Union[float, np.ndarray]:
        """Return uniform variates in the open interval (0, 1).

        Each variate is an odd multiple of ``2**-54``, so neither endpoint
        can occur.
        """
        bits = self._generator.integers(0, 2**53, size=size, dtype=np.int64)
        return (bits + 0.5) * 2.0**-53


@dataclass(frozen=True)
class CirTransitionParams:
    """Parameters of one transition of the variance process."""

    kappa: float
    """Mean-reversion rate."""

    theta: float
    """Long-run variance."""

    sigma: float
    """Volatility of variance."""

    dt: float
    """Length of the transition."""

    delta: float = field(init=False)
    """Degrees of freedom ``4 kappa theta / sigma**2``."""

    def __post_init__(self) -> None:
        for name in ("kappa", "theta", "sigma", "dt"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        delta = 4.0 * self.kappa * self.theta / self.sigma**2
        object.__setattr__(self, "delta", delta)

    @property
    def scale(self) -> float:
        """Factor ``sigma**2 (1 - exp(-kappa dt)) / (4 kappa)``."""
        decay = -math.expm1(-self.kappa * self.dt)
        return self.sigma**2 * decay / (4 * self.kappa)


def cir_noncentrality(v0: ArrayLike, p: CirTransitionParams) -> np.ndarray:
    """Noncentrality parameter of the transition from ``v0``."""
    return np.exp(-p.kappa * p.dt) * np.asarray(v0, dtype=float) / p.scale


def sample_exponential(
    stream: RngStream, size: Size = None
) -> Union[float, np.ndarray]:
    """Draw unit-mean exponential variates."""
    return stream.generator.standard_exponential(size)


def sample_gamma(
    shape: ArrayLike,
    rate: ArrayLike,
    stream: RngStream,
    size: Size = None,
) -> Union[float, np.ndarray]:
    """Draw gamma variates with the given shape and rate.

    numpy's generator uses the Marsaglia-Tsang squeeze method for shapes of
    at least one and a dedicated rejection method for smaller shapes, which
    occur whenever ``delta < 2``.

    Raises
    ------
    hestonsim.exceptions.InvalidArgumentError
        A shape or rate is not positive.
    """
    if np.any(np.asarray(shape) <= 0) or np.any(np.asarray(rate) <= 0):
        raise InvalidArgumentError("Gamma shape and rate must be positive")
    return stream.generator.standard_gamma(shape, size) / rate


def sample_normal(
    mean: ArrayLike,
    stddev: ArrayLike,
    stream: RngStream,
    size: Size = None,
) -> Union[float, np.ndarray]:
    """Draw normal variates."""
    if np.any(np.asarray(stddev) < 0):
        raise InvalidArgumentError("Standard deviation must be nonnegative")
    return stream.generator.normal(mean, stddev, size)


def _poisson_inversion(lam: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Sequential search through the Poisson CDF, all variates at once."""
    k = np.zeros(lam.shape, dtype=np.int64)
    p = np.exp(-lam)
    cdf = p.copy()
    active = u > cdf
    while np.any(active):
        idx = np.flatnonzero(active)
        k[idx] += 1
        p[idx] *= lam[idx] / k[idx]
        cdf[idx] += p[idx]
        # Stop where the CDF no longer moves in binary64.
        active[idx] = (u[idx] > cdf[idx]) & (p[idx] > 0.0)
    return k


def _poisson_transformed_rejection(
    lam: np.ndarray, stream: RngStream
) -> np.ndarray:
    """Hoermann's transformed rejection with squeeze for means >= 10."""
    slam = np.sqrt(lam)
    loglam = np.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    out = np.zeros(lam.shape, dtype=np.int64)
    pending = np.arange(lam.size)
    while pending.size:
        u = stream.uniforms(pending.size) - 0.5
        v = stream.uniforms(pending.size)
        us = 0.5 - np.abs(u)
        aa, bb = a[pending], b[pending]
        k = np.floor((2.0 * aa / us + bb) * u + lam[pending] + 0.43)
        quick = (us >= 0.07) & (v <= vr[pending])
        hopeless = (k < 0) | ((us < 0.013) & (v > us))
        with np.errstate(divide="ignore", invalid="ignore"):
            lhs = (
                np.log(v)
                + np.log(inv_alpha[pending])
                - np.log(aa / (us * us) + bb)
            )
            rhs = (
                -lam[pending]
                + k * loglam[pending]
                - special.gammaln(np.maximum(k, 0.0) + 1.0)
            )
        accept = quick | (~hopeless & (lhs <= rhs))
        out[pending[accept]] = k[accept].astype(np.int64)
        pending = pending[~accept]
    return out


def sample_poisson(
    mean: ArrayLike, stream: RngStream, size: Size = None
) -> Union[int, np.ndarray]:
    """Draw Poisson variates.

    Means below 10 use sequential inversion of the CDF; larger means use the
    transformed rejection method with squeeze.

    Parameters
    ----------
    mean : `float` or `numpy.ndarray`
        Nonnegative means.
    stream : `RngStream`
        Source of randomness.
    size : `int` or `tuple`, optional
        Output shape when ``mean`` is a scalar.

    Raises
    ------
    hestonsim.exceptions.InvalidArgumentError
        A mean is negative.
    """
    lam = np.asarray(mean, dtype=float)
    if np.any(lam < 0) or np.any(~np.isfinite(lam)):
        raise InvalidArgumentError("Poisson mean must be finite and >= 0")
    scalar = size is None and lam.ndim == 0
    shape = lam.shape if size is None else np.broadcast_shapes(
        lam.shape, (size,) if isinstance(size, int) else size
    )
    lam = np.broadcast_to(lam, shape).ravel().astype(float)
    out = np.zeros(lam.size, dtype=np.int64)
    small = np.flatnonzero(lam < _INVERSION_LIMIT)
    large = np.flatnonzero(lam >= _INVERSION_LIMIT)
    if small.size:
        u = stream.uniforms(small.size)
        out[small] = _poisson_inversion(lam[small], np.atleast_1d(u))
    if large.size:
        out[large] = _poisson_transformed_rejection(lam[large], stream)
    if scalar:
        return int(out[0])
    return out.reshape(shape)


def sample_bessel_count(
    nu: float, z: ArrayLike, stream: RngStream, size: Size = None
) -> Union[int, np.ndarray]:
    """Draw Bessel-distributed counts.

    The pmf ``(z/2)**(2n + nu) / (I_nu(z) n! Gamma(n + nu + 1))`` is walked
    upward from ``n = 0`` in log space, using the ratio
    ``(z/2)**2 / ((n + 1)(n + 1 + nu))`` between successive terms.

    Parameters
    ----------
    nu : `float`
        Order, greater than -1.
    z : `float` or `numpy.ndarray`
        Nonnegative arguments.
    stream : `RngStream`
        Source of randomness.
    size : `int` or `tuple`, optional
        Output shape when ``z`` is a scalar.
    """
    if nu <= -1:
        raise InvalidArgumentError(f"Bessel order must exceed -1, got {nu}")
    za = np.asarray(z, dtype=float)
    if np.any(za < 0):
        raise InvalidArgumentError("Bessel argument must be nonnegative")
    scalar = size is None and za.ndim == 0
    shape = za.shape if size is None else np.broadcast_shapes(
        za.shape, (size,) if isinstance(size, int) else size
    )
    za = np.broadcast_to(za, shape).ravel()
    out = np.zeros(za.size, dtype=np.int64)
    live = np.flatnonzero(za > 0)
    if live.size:
        zl = za[live]
        u = np.atleast_1d(stream.uniforms(live.size))
        quarter_z2 = 0.25 * zl * zl
        log_p = (
            nu * np.log(0.5 * zl)
            - log_bessel_i(nu, zl)
            - special.gammaln(nu + 1.0)
        )
        cdf = np.exp(log_p)
        n = np.zeros(live.size, dtype=np.int64)
        active = np.flatnonzero(u > cdf)
        while active.size:
            log_p[active] += np.log(quarter_z2[active]) - np.log(
                (n[active] + 1.0) * (n[active] + 1.0 + nu)
            )
            n[active] += 1
            step = np.exp(log_p[active])
            cdf[active] += step
            moving = (u[active] > cdf[active]) & (
                (step > 0.0) | (n[active] < quarter_z2[active])
            )
            active = active[moving]
        out[live] = n
    if scalar:
        return int(out[0])
    return out.reshape(shape)


def sample_cir_transition(
    v0: ArrayLike,
    p: CirTransitionParams,
    stream: RngStream,
    size: Size = None,
) -> Union[float, np.ndarray]:
    """Draw the variance after one exact transition.

    The draw is ``scale * 2 * Gamma(delta/2 + N, 1)`` with
    ``N ~ Poisson(lambda / 2)``, a Poisson mixture of central chi-squared
    variates.
    """
    v = np.asarray(v0, dtype=float)
    if np.any(v < 0):
        raise InvalidArgumentError("Initial variance must be nonnegative")
    scalar = size is None and v.ndim == 0
    lam = cir_noncentrality(v, p)
    if size is not None:
        lam = np.broadcast_to(lam, (size,) if isinstance(size, int) else size)
    counts = np.asarray(sample_poisson(0.5 * lam, stream))
    shape = 0.5 * p.delta + counts
    draws = 2.0 * p.scale * stream.generator.standard_gamma(shape)
    if scalar:
        return float(draws)
    return np.asarray(draws)
