"""Special-function kernels.

These are the building blocks of the cumulative distribution series of the
base random variables, of the acceptance factor of the measure change, and of
the Chebyshev inverse-CDF tables.  Everything is evaluated in binary64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Union

import numpy as np
from numpy.polynomial import chebyshev
from scipy import special

from .exceptions import ConvergenceError, InvalidArgumentError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

__all__ = [
    "DEFAULT_CONTROL",
    "PCF_CROSSOVER",
    "SeriesControl",
    "clenshaw_eval",
    "default_switch_constant",
    "log_bessel_i",
    "lower_incomplete_gamma",
    "parabolic_cylinder",
    "parabolic_cylinder_asymptotic",
    "parabolic_cylinder_power",
    "pcf_power_coefficients",
    "upper_incomplete_gamma",
    "upper_incomplete_gamma_scaled",
]

FloatOrArray = Union[float, np.ndarray]

PCF_CROSSOVER = 5.25
"""Argument near which both branches of ``D`` lose about 1e-10 relative
accuracy in binary64; larger arguments ruin the power series."""


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for a convergent or asymptotic series."""

    max_terms: int = 4000
    """Largest number of terms summed before giving up."""

    rel_tol: float = 1e-16
    """Stop once the latest terms are below this fraction of the sum."""

    def __post_init__(self) -> None:
        if self.max_terms < 1:
            raise InvalidArgumentError("max_terms must be at least 1")
        if not 0.0 < self.rel_tol < 1.0:
            raise InvalidArgumentError("rel_tol must lie in (0, 1)")


DEFAULT_CONTROL = SeriesControl()


def clenshaw_eval(coeffs: ArrayLike, z: ArrayLike) -> FloatOrArray:
    """Evaluate a Chebyshev sum with the halved constant term.

    The value is ``c0 T0(z) + c1 T1(z) + ... + cn Tn(z) - c0 / 2``, computed
    with Clenshaw's recurrence (`numpy.polynomial.chebyshev.chebval`).

    Parameters
    ----------
    coeffs : array-like
        Coefficients ``c0 .. cn``.
    z : `float` or `numpy.ndarray`
        Evaluation points.  Points outside ``[-1, 1]`` are clamped.

    Returns
    -------
    value : `float` or `numpy.ndarray`
        The Chebyshev sum, with the shape of ``z``.

    Raises
    ------
    hestonsim.exceptions.InvalidArgumentError
        The coefficient list is empty.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise InvalidArgumentError("Chebyshev coefficient list is empty")
    zc = np.clip(z, -1.0, 1.0)
    return chebyshev.chebval(zc, c) - 0.5 * c[0]


def pcf_power_coefficients(order: float, n_terms: int) -> np.ndarray:
    """Scaled Maclaurin coefficients of the parabolic cylinder function.

    The returned ``e[k]`` relate to the Taylor coefficients ``d[k]`` of
    ``D_order(z)`` by ``d[k] = e[k] / (2**k * Gamma(k/2 + 1))``.  In this
    scaling the coefficients stay of moderate size for large ``k``, so long
    sums can be formed in log space without underflow.
    """
    nu = float(order)
    e = np.zeros(max(n_terms, 2))
    root_pi = math.sqrt(math.pi)
    e[0] = 2.0 ** (nu / 2.0) * root_pi * special.rgamma((1.0 - nu) / 2.0)
    e[1] = -(2.0 ** ((nu + 1.0) / 2.0)) * math.pi * special.rgamma(-nu / 2.0)
    for m in range(2, n_terms):
        back = e[m - 4] if m >= 4 else 0.0
        e[m] = ((m - 2) * back - (2.0 * nu + 1.0) * e[m - 2]) / (m - 1)
    return e[:n_terms]


def parabolic_cylinder_power(
    order: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Parabolic cylinder function ``D_order(z)`` from its power series.

    Raises
    ------
    hestonsim.exceptions.ConvergenceError
        The series did not settle within ``ctrl.max_terms`` terms.
    """
    e = pcf_power_coefficients(order, 2)
    if z == 0.0:
        return float(e[0])
    log_half = math.log(0.5 * z)
    peak = 0.5 * z * z + 2.0
    coeffs: List[float] = [float(e[0]), float(e[1])]
    total = 0.0
    previous = 0.0
    for k in range(ctrl.max_terms):
        if k >= 2:
            back = coeffs[k - 4] if k >= 4 else 0.0
            coeffs.append(
                ((k - 2) * back - (2.0 * order + 1.0) * coeffs[k - 2])
                / (k - 1)
            )
        ek = coeffs[k]
        if ek == 0.0:
            term = 0.0
        else:
            term = ek * math.exp(k * log_half - special.gammaln(0.5 * k + 1))
        total += term
        if k > peak and abs(term) + abs(previous) <= ctrl.rel_tol * abs(
            total
        ):
            return total
        previous = term
    raise ConvergenceError(
        f"Power series of D_{order}({z})", total, ctrl.max_terms
    )


def parabolic_cylinder_asymptotic(
    order: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Parabolic cylinder function ``D_order(z)`` from its large-``z``
    expansion, truncated at the smallest term."""
    two_z2 = 2.0 * z * z
    term = 1.0
    total = 1.0
    for k in range(ctrl.max_terms):
        following = (
            -term
            * (order - 2 * k)
            * (order - 2 * k - 1)
            / ((k + 1) * two_z2)
        )
        if following == 0.0 or abs(following) >= abs(term):
            break
        total += following
        term = following
        if abs(term) <= ctrl.rel_tol * abs(total):
            break
    return math.exp(-0.25 * z * z + order * math.log(z)) * total


def default_switch_constant(parameter: float) -> float:
    """Switch constant placing the branch change at `PCF_CROSSOVER`."""
    return PCF_CROSSOVER / (parameter + 1.5)


def parabolic_cylinder(
    order: float,
    z: float,
    switch_const: Optional[float] = None,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Parabolic cylinder function ``D_order(z)`` for ``z >= 0``.

    Parameters
    ----------
    order : `float`
        The order ``P + 1`` (positive).
    z : `float`
        Nonnegative argument.
    switch_const : `float`, optional
        The power series is used below ``switch_const * (P + 3/2)`` and the
        asymptotic series at or above it.  Defaults to
        `default_switch_constant`.
    ctrl : `SeriesControl`
        Truncation control.

    Returns
    -------
    value : `float`
        ``D_order(z)``.

    Raises
    ------
    hestonsim.exceptions.InvalidArgumentError
        ``order <= 0``, ``z < 0`` or ``switch_const <= 1``.
    hestonsim.exceptions.ConvergenceError
        The power series did not converge.
    """
    if order <= 0:
        raise InvalidArgumentError(f"Order must be positive, got {order}")
    if z < 0:
        raise InvalidArgumentError(f"Argument must be nonnegative, got {z}")
    if switch_const is None:
        switch_const = default_switch_constant(order - 1.0)
    elif switch_const <= 1:
        raise InvalidArgumentError("Switch constant must exceed 1")
    if z < switch_const * (order + 0.5):
        return parabolic_cylinder_power(order, z, ctrl)
    return parabolic_cylinder_asymptotic(order, z, ctrl)


def _check_gamma_domain(s: ArrayLike, z: ArrayLike) -> None:
    if np.any(np.asarray(s) <= 0):
        raise InvalidArgumentError("Incomplete gamma shape must be positive")
    if np.any(np.asarray(z) < 0):
        raise InvalidArgumentError("Incomplete gamma argument must be >= 0")


def lower_incomplete_gamma(s: ArrayLike, z: ArrayLike) -> FloatOrArray:
    """Lower incomplete gamma function ``gamma(s, z)`` (not regularized)."""
    _check_gamma_domain(s, z)
    return np.exp(special.gammaln(s)) * special.gammainc(s, z)


def upper_incomplete_gamma(s: ArrayLike, z: ArrayLike) -> FloatOrArray:
    """Upper incomplete gamma function ``Gamma(s, z)`` (not regularized)."""
    _check_gamma_domain(s, z)
    return np.exp(special.gammaln(s)) * special.gammaincc(s, z)


def log_bessel_i(nu: float, z: ArrayLike) -> FloatOrArray:
    """Logarithm of the modified Bessel function of the first kind.

    Small arguments use the leading terms of the ascending series in log
    space; otherwise the exponentially scaled `scipy.special.ive` is used, so
    the result does not overflow for large ``z``.

    Parameters
    ----------
    nu : `float`
        Order, greater than -1.
    z : `float` or `numpy.ndarray`
        Nonnegative argument.

    Returns
    -------
    value : `float` or `numpy.ndarray`
        ``log I_nu(z)``.  At ``z = 0`` this is 0 for ``nu = 0``, ``-inf`` for
        ``nu > 0`` and ``inf`` for ``nu < 0``.
    """
    if nu <= -1:
        raise InvalidArgumentError(f"Bessel order must exceed -1, got {nu}")
    za = np.asarray(z, dtype=float)
    if np.any(za < 0):
        raise InvalidArgumentError("Bessel argument must be nonnegative")
    t = 0.25 * za * za
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        series = (
            nu * np.log(0.5 * za)
            - special.gammaln(nu + 1.0)
            + np.log1p(t / (nu + 1.0) * (1.0 + t / (2.0 * (nu + 2.0))))
        )
        direct = np.log(special.ive(nu, za)) + za
    value = np.where(za < 1e-3, series, direct)
    if nu == 0:
        value = np.where(za == 0.0, 0.0, value)
    return value[()]


def upper_incomplete_gamma_scaled(
    s: float, x: ArrayLike, ctrl: SeriesControl = DEFAULT_CONTROL
) -> FloatOrArray:
    """Scaled upper incomplete gamma ``Gamma(s, x) exp(x) x**-s``.

    Unlike `upper_incomplete_gamma`, any real ``s`` is allowed, including
    zero and negative values, and the scaling avoids underflow for large
    ``x``.  For ``s > 0`` and ``x <= s + 1`` the value comes from
    `scipy.special.gammaincc`; otherwise from the continued fraction of
    Legendre, evaluated with the modified Lentz method.

    Raises
    ------
    hestonsim.exceptions.InvalidArgumentError
        Some ``x`` is not positive.
    hestonsim.exceptions.ConvergenceError
        The continued fraction did not settle.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa <= 0):
        raise InvalidArgumentError("Argument must be positive")
    out = np.empty(xa.shape)
    near = (xa <= s + 1.0) if s > 0 else np.zeros(xa.shape, dtype=bool)
    if np.any(near):
        xn = xa[near]
        out[near] = np.exp(
            np.log(special.gammaincc(s, xn))
            + special.gammaln(s)
            + xn
            - s * np.log(xn)
        )
    far = ~near
    if np.any(far):
        out[far] = _gamma_continued_fraction(s, xa[far], ctrl)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def _gamma_continued_fraction(
    s: float, x: np.ndarray, ctrl: SeriesControl
) -> np.ndarray:
    tiny = 1e-300
    tol = max(ctrl.rel_tol, float(np.finfo(float).eps))
    b = x + 1.0 - s
    c = np.full(x.shape, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, ctrl.max_terms):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        step = d * c
        h = h * step
        if np.all(np.abs(step - 1.0) <= tol):
            return h
    raise ConvergenceError(
        f"Continued fraction of Gamma({s}, x)", float(h[0]), ctrl.max_terms
    )
