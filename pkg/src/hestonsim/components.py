"""Direct-inversion samplers of the base variables ``S^P``, ``Y2^h`` and
``Z'``, plus truncated-series constructions of the same laws."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_HALF_EVEN, Decimal
from typing import TYPE_CHECKING, Dict, Mapping, Optional, Tuple, Union

import numpy as np
from scipy import special

from .config import config
from .exceptions import InvalidArgumentError
from .sampling import Size
from .tables import SUM_BASES, Y2_DENOMINATORS

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .diagnostics import RunDiagnostics
    from .sampling import RngStream
    from .tables import InverseCdfTable, TableSet

__all__ = [
    "BaseDecomposition",
    "HDigits",
    "decompose_count",
    "decompose_h",
    "h_denominators",
    "round_h",
    "sample_c_series",
    "sample_s_p",
    "sample_s_series",
    "sample_y2",
    "sample_y2_series",
    "sample_z_prime",
]

_TWO_OVER_PI2 = 2.0 / math.pi**2

_SERIES_BLOCK = 64
"""Inner series terms drawn per block by the truncated-series samplers."""


@dataclass(frozen=True)
class BaseDecomposition:
    """Greedy decomposition of a count over the tabulated sum bases."""

    multiplicities: Mapping[int, int]

    @property
    def total(self) -> int:
        return sum(b * m for b, m in self.multiplicities.items())

    @property
    def draws(self) -> int:
        """Number of table lookups needed for one draw."""
        return sum(self.multiplicities.values())


@dataclass(frozen=True)
class HDigits:
    """Digits ``h_k`` with ``h = sum(h_k / k)`` over the denominators."""

    digits: Mapping[int, int]
    integer_part: int = 0
    """Whole part of ``h``, drawn from the sum tables."""

    @property
    def value(self) -> Decimal:
        total = Decimal(self.integer_part)
        for k, d in self.digits.items():
            total += Decimal(d) / Decimal(k)
        return total


def decompose_count(count: int) -> BaseDecomposition:
    """Split a positive count greedily over ``SUM_BASES``.

    Raises
    ------
    hestonsim.exceptions.InvalidArgumentError
        ``count`` is not a positive integer.
    """
    if int(count) != count or count < 1:
        raise InvalidArgumentError(f"Count must be positive, got {count}")
    rest = int(count)
    multiplicities = {}
    for base in SUM_BASES:
        multiplicities[base], rest = divmod(rest, base)
    return BaseDecomposition(multiplicities)


def h_denominators(decimals: int = 3) -> Tuple[int, ...]:
    """Denominators of the 1-2-5 ladder resolving ``decimals`` places."""
    if decimals == 3:
        return Y2_DENOMINATORS
    if decimals < 1:
        raise InvalidArgumentError("At least one decimal place is needed")
    ladder = [5, 10]
    for j in range(1, decimals):
        ladder.extend((2 * 10**j, 5 * 10**j, 10 ** (j + 1)))
    ladder.append(2 * 10**decimals)
    return tuple(ladder)


def round_h(h: float, decimals: int = 3) -> Decimal:
    """Round ``h`` to the given number of decimal places."""
    quantum = Decimal(1).scaleb(-decimals)
    return Decimal(repr(float(h))).quantize(quantum, rounding=ROUND_HALF_EVEN)


def decompose_h(h: float, decimals: Optional[int] = None) -> HDigits:
    """Express ``h`` (rounded) as a sum of unit fractions with small digits.

    Digits are found greedily from ``1/5`` down and capped at 2.  Rounded
    values above the capped maximum (0.7775 at three decimals) let the
    ``1/5`` digit grow so that every ``h < 1`` is represented.  The whole part
    of ``h >= 1`` is kept separately.

    Raises
    ------
    hestonsim.exceptions.InvalidArgumentError
        ``h`` rounds to zero or is negative.
    """
    if decimals is None:
        decimals = config.h_decimals
    rounded = round_h(h, decimals)
    if rounded <= 0:
        raise InvalidArgumentError(
            f"h = {h!r} rounds to zero at {decimals} decimals"
        )
    denominators = h_denominators(decimals)
    whole = int(rounded)
    rest = rounded - whole
    fractions = [Decimal(1) / Decimal(k) for k in denominators]
    capped = sum((2 * f for f in fractions[1:]), Decimal(0))
    digits: Dict[int, int] = {}
    for i, (k, f) in enumerate(zip(denominators, fractions)):
        d = min(2, int(rest / f))
        if i == 0 and rest - d * f > capped:
            excess = (rest - capped) / f
            d = int(excess.to_integral_value(rounding=ROUND_CEILING))
        digits[k] = d
        rest -= d * f
    if rest != 0:
        raise InvalidArgumentError(f"Cannot decompose h = {rounded}")
    return HDigits(digits=digits, integer_part=whole)


def _sum_of_draws(
    table: InverseCdfTable,
    counts: np.ndarray,
    stream: RngStream,
    diagnostics: Optional[RunDiagnostics],
) -> np.ndarray:
    """For each entry, the sum of ``counts[i]`` independent table draws."""
    total = int(counts.sum())
    if total == 0:
        return np.zeros(counts.shape)
    u = np.atleast_1d(stream.uniforms(total))
    draws = np.asarray(table.variates(u, diagnostics))
    owner = np.repeat(np.arange(counts.size), counts)
    return np.bincount(owner, weights=draws, minlength=counts.size)


def sample_s_p(
    count: ArrayLike,
    tables: TableSet,
    stream: RngStream,
    diagnostics: Optional[RunDiagnostics] = None,
) -> Union[float, np.ndarray]:
    """Draw ``S^P``, the sum of ``P`` independent copies of ``S``.

    Parameters
    ----------
    count : `int` or `numpy.ndarray`
        Nonnegative integer ``P`` for each draw.  Zero gives zero.
    tables : `hestonsim.tables.TableSet`
        Loaded tables with one table per sum base.
    stream : `hestonsim.sampling.RngStream`
        Source of randomness.
    diagnostics : `hestonsim.diagnostics.RunDiagnostics`, optional
        Collector for clipped uniforms.

    Returns
    -------
    value : `float` or `numpy.ndarray`
        One draw per entry of ``count``.

    Raises
    ------
    hestonsim.exceptions.MissingTableError
        A required sum table is not loaded.
    """
    counts = np.asarray(count)
    if np.any(counts < 0) or not np.all(np.mod(counts, 1) == 0):
        raise InvalidArgumentError("Counts must be nonnegative integers")
    rest = counts.astype(np.int64).ravel()
    out = np.zeros(rest.shape)
    for base in SUM_BASES:
        multiplicity, rest = np.divmod(rest, base)
        if multiplicity.any():
            table = tables.sum_table(base)
            out += _sum_of_draws(table, multiplicity, stream, diagnostics)
    if counts.ndim == 0:
        return float(out[0])
    return out.reshape(counts.shape)


def sample_y2(
    h: float,
    tables: TableSet,
    stream: RngStream,
    size: Size = None,
    diagnostics: Optional[RunDiagnostics] = None,
) -> Union[float, np.ndarray]:
    """Draw ``Y2^h`` by summing table draws of ``Y2^(1/k)``.

    ``h`` is rounded first (see `decompose_h`); the rounding is recorded in
    ``diagnostics``.  The whole part of ``h`` comes from the sum tables since
    ``Y2^n`` and ``S^n`` share a law.
    """
    digits = decompose_h(h)
    if diagnostics is not None:
        diagnostics.record_h(float(h), float(digits.value))
    n = 1 if size is None else int(np.prod(size))
    out = np.zeros(n)
    for k, d in digits.digits.items():
        if d:
            counts = np.full(n, d, dtype=np.int64)
            table = tables.y2_table(k)
            out += _sum_of_draws(table, counts, stream, diagnostics)
    if digits.integer_part:
        out += np.asarray(
            sample_s_p(
                np.full(n, digits.integer_part), tables, stream, diagnostics
            )
        )
    if size is None:
        return float(out[0])
    return out.reshape(size)


def sample_z_prime(
    tables: TableSet,
    stream: RngStream,
    size: Size = None,
    diagnostics: Optional[RunDiagnostics] = None,
) -> Union[float, np.ndarray]:
    """Draw ``Z'``, the unit-time-scale version of a ``Z`` component."""
    u = stream.uniforms(size)
    return tables.z_prime_table().variates(u, diagnostics)


def sample_s_series(
    n_inner: int, stream: RngStream, size: int
) -> np.ndarray:
    """Draw ``S = (2/pi^2) sum eps_l / l^2`` from a truncated series.

    The first ``n_inner`` exponential terms are simulated; the rest are
    replaced by their mean.
    """
    if n_inner < 1:
        raise InvalidArgumentError("n_inner must be at least 1")
    out = np.zeros(size)
    for start in range(1, n_inner + 1, _SERIES_BLOCK):
        ell = np.arange(start, min(start + _SERIES_BLOCK, n_inner + 1))
        eps = stream.generator.standard_exponential((size, ell.size))
        out += eps @ (1.0 / ell**2)
    tail = float(special.polygamma(1, n_inner + 1))
    return _TWO_OVER_PI2 * (out + tail)


def sample_c_series(
    shape: float,
    n_inner: int,
    stream: RngStream,
    size: int,
    gamma_tail: bool = False,
) -> np.ndarray:
    """Draw ``C^shape = (2/pi^2) sum G_l / (l - 1/2)^2`` with
    ``G_l ~ Gamma(shape, 1)`` from a truncated series.

    The remainder after ``n_inner`` terms is replaced by its mean, or with
    ``gamma_tail`` by a gamma variate matching its mean and variance.
    """
    if n_inner < 1:
        raise InvalidArgumentError("n_inner must be at least 1")
    if shape <= 0:
        raise InvalidArgumentError("shape must be positive")
    out = np.zeros(size)
    for start in range(1, n_inner + 1, _SERIES_BLOCK):
        ell = np.arange(start, min(start + _SERIES_BLOCK, n_inner + 1))
        g = stream.generator.standard_gamma(shape, (size, ell.size))
        out += g @ (1.0 / (ell - 0.5) ** 2)
    x = n_inner + 0.5
    tail_mean = shape * float(special.polygamma(1, x))
    if gamma_tail:
        # Var of the remainder is shape * sum (l - 1/2)^-4 = shape psi'''/6.
        tail_var = shape * float(special.polygamma(3, x)) / 6.0
        tail = stream.generator.standard_gamma(
            tail_mean**2 / tail_var, size
        ) * (tail_var / tail_mean)
        return _TWO_OVER_PI2 * (out + tail)
    return _TWO_OVER_PI2 * (out + tail_mean)


def sample_y2_series(
    h: float,
    n_inner: int,
    n_outer: int,
    stream: RngStream,
    size: int,
) -> np.ndarray:
    """Draw ``Y2^h = sum_{n >= 1} 4^-n C_n^h`` from truncated series.

    Levels beyond ``n_outer`` are replaced by their mean ``h 4^-n_outer / 3``.
    """
    if n_outer < 1:
        raise InvalidArgumentError("n_outer must be at least 1")
    out = np.zeros(size)
    for level in range(1, n_outer + 1):
        out += 4.0**-level * sample_c_series(h, n_inner, stream, size)
    return out + h * 4.0**-n_outer / 3.0
