"""Piecewise Chebyshev inverse CDFs of the base random variables.

A table approximates the quantile function of one base variable (a sum
``S^P``, a ``Y2^h`` core or ``Z'``) on ``[1e-12, 1 - 1e-12]``.  The interval
is split into regimes; each regime maps the probability ``u`` to a scaled
variable ``U(u)``, maps that affinely onto ``[-1, 1]`` and evaluates a
Chebyshev sum there.

Table files are line-oriented text::

    # title
    base_id sp_10
    parameter 10
    standardized true
    anchor 5.379510893093010e-01

    regime left_tail
    u_right 3.331451575280440e-01
    scaling_kind log_log_left
    k1 -6.189978932685550e-01
    k2 1.058533490397160e+00
    degree 20
    <degree + 1 coefficients, one per line>
    end

An optional ``switch_constant`` header line overrides the parabolic
cylinder switch for the table, and an optional ``gamma_constant`` line in a
``gamma_log_right`` regime replaces ``Gamma(5P/2)`` in its scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import (
    TYPE_CHECKING,
    Callable,
    Dict,
    Iterator,
    List,
    Mapping,
    Optional,
    Tuple,
    Union,
)

import numpy as np
from scipy import special

from .config import config
from .exceptions import (
    CorruptedTableError,
    MissingTableError,
    TableAuditError,
    TableParseError,
)
from .specfun import clenshaw_eval

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .diagnostics import RunDiagnostics

__all__ = [
    "InverseCdfTable",
    "MAX_DEGREE",
    "RegimeSpec",
    "RegimeValidation",
    "SUM_BASES",
    "ScalingKind",
    "TableAudit",
    "TableSet",
    "Y2_DENOMINATORS",
    "audit_table",
    "destandardize",
    "dump_table",
    "inverse_cdf",
    "load_table",
    "parse_table",
    "scale_u",
    "unscale_u",
    "validate_table",
    "validation_report",
]

SUM_BASES = (1_000_000, 100_000, 10_000, 5_000, 50, 10, 1)
"""Parameters ``P`` with a table for ``S^P``, largest first."""

Y2_DENOMINATORS = (5, 10, 20, 50, 100, 200, 500, 1000, 2000)
"""Denominators ``k`` with a table for ``Y2^(1/k)``."""

MAX_DEGREE = 40

_MAP_SLACK = 1e-6
"""Allowed overshoot of the affine map beyond ``[-1, 1]`` at regime ends."""

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class ScalingKind(Enum):
    """How a regime transforms ``u`` before the affine map."""

    LOG_LOG_TAIL = "log_log_tail"
    LOG_LOG_LEFT = "log_log_left"
    CENTRAL_PRODUCT = "central_product"
    CENTRAL_PRODUCT_LEFT = "central_product_left"
    LINEAR_CENTRAL = "linear_central"
    RECIPROCAL_LOG_LEFT = "reciprocal_log_left"
    GAMMA_LOG_RIGHT = "gamma_log_right"

    @property
    def is_product(self) -> bool:
        """Whether the quantile is ``U(u)`` times the Chebyshev sum."""
        return self in (
            ScalingKind.CENTRAL_PRODUCT,
            ScalingKind.CENTRAL_PRODUCT_LEFT,
        )


def _log_gamma_constant(parameter: float, constant: Optional[float]) -> float:
    if constant is not None:
        return math.log(constant)
    return float(special.gammaln(2.5 * parameter))


def _left_terms(parameter: float) -> Tuple[float, float, float]:
    """Constants of the reciprocal-log scaling: ``a = alpha - beta log u``
    with the additive constant ``gamma`` folded into ``alpha``."""
    p = parameter
    beta = 2.0 / (p * p)
    log_c = 0.5 * math.log(math.pi) - (p + 0.5) * math.log(2.0)
    log_c -= (p - 1.0) * math.log(p)
    alpha = beta * (p - 0.5) * math.log(beta) - beta * log_c
    return alpha, beta, log_c


def scale_u(
    kind: ScalingKind,
    u: ArrayLike,
    parameter: float,
    anchor: Optional[float] = None,
    u_right: Optional[float] = None,
    gamma_constant: Optional[float] = None,
) -> Union[float, np.ndarray]:
    """Map probabilities to the scaled variable of a regime.

    Parameters
    ----------
    kind : `ScalingKind`
        The regime's scaling.
    u : `float` or `numpy.ndarray`
        Probabilities inside the regime.
    parameter : `float`
        The table's ``P`` (or ``h``).
    anchor : `float`, optional
        ``F(0)`` of the standardized variable, for the product scalings.
    u_right : `float`, optional
        Right boundary of the regime, for the linear central scaling.
    gamma_constant : `float`, optional
        Replacement for ``Gamma(5P/2)`` in the gamma-log scaling.

    Returns
    -------
    U : `float` or `numpy.ndarray`
        The scaled variable.
    """
    ua = np.asarray(u, dtype=float)
    if kind is ScalingKind.LOG_LOG_TAIL:
        result = np.log(-np.log1p(-ua))
    elif kind is ScalingKind.LOG_LOG_LEFT:
        result = np.log(-np.log(ua))
    elif kind is ScalingKind.CENTRAL_PRODUCT:
        result = _SQRT_2PI * (ua - _require(anchor, "anchor"))
    elif kind is ScalingKind.CENTRAL_PRODUCT_LEFT:
        result = _SQRT_2PI * (_require(anchor, "anchor") - ua)
    elif kind is ScalingKind.LINEAR_CENTRAL:
        right = _require(u_right, "u_right")
        result = (right - ua) * math.sqrt(2.0 * parameter / 45.0)
    elif kind is ScalingKind.RECIPROCAL_LOG_LEFT:
        alpha, beta, _ = _left_terms(parameter)
        result = 1.0 / (alpha - beta * np.log(ua))
    else:
        log_c = _log_gamma_constant(parameter, gamma_constant)
        result = (-2.0 / 15.0) * (np.log1p(-ua) + log_c)
    return result[()]


def unscale_u(
    kind: ScalingKind,
    scaled: ArrayLike,
    parameter: float,
    anchor: Optional[float] = None,
    u_right: Optional[float] = None,
    gamma_constant: Optional[float] = None,
) -> Union[float, np.ndarray]:
    """Inverse of `scale_u`: the probability with the given scaled value."""
    s = np.asarray(scaled, dtype=float)
    if kind is ScalingKind.LOG_LOG_TAIL:
        result = -np.expm1(-np.exp(s))
    elif kind is ScalingKind.LOG_LOG_LEFT:
        result = np.exp(-np.exp(s))
    elif kind is ScalingKind.CENTRAL_PRODUCT:
        result = _require(anchor, "anchor") + s / _SQRT_2PI
    elif kind is ScalingKind.CENTRAL_PRODUCT_LEFT:
        result = _require(anchor, "anchor") - s / _SQRT_2PI
    elif kind is ScalingKind.LINEAR_CENTRAL:
        right = _require(u_right, "u_right")
        result = right - s / math.sqrt(2.0 * parameter / 45.0)
    elif kind is ScalingKind.RECIPROCAL_LOG_LEFT:
        alpha, beta, _ = _left_terms(parameter)
        result = np.exp((alpha - 1.0 / s) / beta)
    else:
        log_c = _log_gamma_constant(parameter, gamma_constant)
        result = -np.expm1(-7.5 * s - log_c)
    return result[()]


def _require(value: Optional[float], name: str) -> float:
    if value is None:
        raise CorruptedTableError(f"Scaling needs {name} but none is set")
    return value


def destandardize(
    parameter: float, values: ArrayLike
) -> Union[float, np.ndarray]:
    """Turn standardized draws ``Z^P`` into draws of ``S^P``."""
    return parameter / 3.0 + np.asarray(values) * math.sqrt(
        2.0 * parameter / 45.0
    )


@dataclass(frozen=True)
class RegimeSpec:
    """One regime of a piecewise inverse CDF."""

    label: str
    u_left: float
    u_right: float
    scaling_kind: ScalingKind
    k1: float
    k2: float
    coefficients: Tuple[float, ...]
    gamma_constant: Optional[float] = None
    text: Mapping[str, str] = field(
        default_factory=dict, compare=False, repr=False
    )
    """Decimal text of the numeric fields as read from a file."""

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def scaled(
        self, u: ArrayLike, parameter: float, anchor: Optional[float]
    ) -> Union[float, np.ndarray]:
        """The scaled variable ``U(u)`` of this regime."""
        return scale_u(
            self.scaling_kind,
            u,
            parameter,
            anchor=anchor,
            u_right=self.u_right,
            gamma_constant=self.gamma_constant,
        )

    def evaluate(
        self, u: ArrayLike, parameter: float, anchor: Optional[float]
    ) -> Union[float, np.ndarray]:
        """The regime's quantile approximation at ``u`` (table units)."""
        scaled = self.scaled(u, parameter, anchor)
        z = self.k1 * np.asarray(scaled) + self.k2
        value = clenshaw_eval(self.coefficients, z)
        if self.scaling_kind.is_product:
            return scaled * value
        return value


@dataclass(frozen=True)
class InverseCdfTable:
    """The piecewise Chebyshev inverse CDF of one base random variable."""

    base_id: str
    parameter: float
    standardized: bool
    regimes: Tuple[RegimeSpec, ...]
    anchor: Optional[float] = None
    switch_constant: Optional[float] = None
    title: str = ""
    text: Mapping[str, str] = field(
        default_factory=dict, compare=False, repr=False
    )

    @property
    def boundaries(self) -> np.ndarray:
        """Right boundaries of the regimes."""
        return np.array([r.u_right for r in self.regimes])

    def regime_index(self, u: ArrayLike) -> np.ndarray:
        """Index of the regime holding each probability.

        Raises
        ------
        hestonsim.exceptions.CorruptedTableError
            A probability lies beyond the last regime.
        """
        idx = np.searchsorted(self.boundaries, u, side="left")
        if np.any(idx >= len(self.regimes)):
            raise CorruptedTableError(
                f"{self.base_id}: no regime contains u = {np.max(u)!r}"
            )
        return idx

    def quantile(
        self,
        u: ArrayLike,
        diagnostics: Optional[RunDiagnostics] = None,
    ) -> Union[float, np.ndarray]:
        """Evaluate the approximation in table units.

        Probabilities outside ``[clip_lower, clip_upper]`` are clipped and
        counted in ``diagnostics``.  Standardized tables return ``Z^P``.
        """
        ua = np.asarray(u, dtype=float)
        clipped = np.clip(ua, config.clip_lower, config.clip_upper)
        if diagnostics is not None:
            diagnostics.record_clips(int(np.count_nonzero(clipped != ua)))
        flat = np.atleast_1d(clipped).ravel()
        idx = self.regime_index(flat)
        out = np.empty(flat.shape)
        for i in np.unique(idx):
            mask = idx == i
            out[mask] = self.regimes[i].evaluate(
                flat[mask], self.parameter, self.anchor
            )
        if ua.ndim == 0:
            return float(out[0])
        return out.reshape(ua.shape)

    def variates(
        self,
        u: ArrayLike,
        diagnostics: Optional[RunDiagnostics] = None,
    ) -> Union[float, np.ndarray]:
        """Evaluate the approximation in the variate's own units."""
        values = self.quantile(u, diagnostics)
        if self.standardized:
            return destandardize(self.parameter, values)
        return values


def inverse_cdf(
    table: InverseCdfTable,
    u: ArrayLike,
    diagnostics: Optional[RunDiagnostics] = None,
) -> Union[float, np.ndarray]:
    """Approximate quantile of ``table`` at ``u``.

    Standardized tables return ``Z^P``; use `destandardize` or
    `InverseCdfTable.variates` for ``S^P``.
    """
    return table.quantile(u, diagnostics)


def _number(
    token: str, base_id: str, regime: Optional[str], name: str
) -> float:
    try:
        value = float(token)
    except ValueError:
        raise TableParseError(
            f"malformed number {token!r} for {name}", base_id, regime
        )
    if not math.isfinite(value):
        raise TableParseError(f"non-finite {name}", base_id, regime)
    return value


_HEADER_KEYS = (
    "base_id",
    "parameter",
    "standardized",
    "anchor",
    "switch_constant",
)
_REGIME_KEYS = (
    "u_right",
    "scaling_kind",
    "gamma_constant",
    "k1",
    "k2",
    "degree",
)


def _build_regime(
    label: str,
    fields: Dict[str, str],
    coefficients: List[str],
    u_left: float,
    base_id: str,
) -> RegimeSpec:
    for key in ("u_right", "scaling_kind", "k1", "k2", "degree"):
        if key not in fields:
            raise TableParseError(f"missing {key}", base_id, label)
    try:
        kind = ScalingKind(fields["scaling_kind"])
    except ValueError:
        raise TableParseError(
            f"unknown scaling kind {fields['scaling_kind']!r}", base_id, label
        )
    gamma_constant = None
    if "gamma_constant" in fields:
        gamma_constant = _number(
            fields["gamma_constant"], base_id, label, "gamma_constant"
        )
    u_right = _number(fields["u_right"], base_id, label, "u_right")
    if u_right <= u_left:
        raise TableAuditError(
            f"regime overlaps its predecessor (u_right {u_right!r})",
            base_id,
            label,
        )
    text = {k: v for k, v in fields.items() if k not in ("degree",)}
    for i, token in enumerate(coefficients):
        text[f"c{i}"] = token
    return RegimeSpec(
        label=label,
        u_left=u_left,
        u_right=u_right,
        scaling_kind=kind,
        k1=_number(fields["k1"], base_id, label, "k1"),
        k2=_number(fields["k2"], base_id, label, "k2"),
        coefficients=tuple(
            _number(c, base_id, label, "coefficient") for c in coefficients
        ),
        gamma_constant=gamma_constant,
        text=text,
    )


def parse_table(text: str, source: str = "<string>") -> InverseCdfTable:
    """Parse the text of a table file.

    Raises
    ------
    hestonsim.exceptions.TableParseError
        The text is malformed; the message names the regime.
    hestonsim.exceptions.TableAuditError
        Regimes overlap, leave a gap, or map outside ``[-1, 1]``.
    """
    title = ""
    header: Dict[str, str] = {}
    regimes: List[RegimeSpec] = []
    label: Optional[str] = None
    fields: Dict[str, str] = {}
    coefficients: List[str] = []
    expected = -1
    u_left = config.clip_lower
    base_id = source
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            if not title and not header and label is None:
                title = line[1:].strip()
            continue
        if not line:
            continue
        if label is not None and 0 <= len(coefficients) < expected:
            coefficients.append(line)
            continue
        key, _, value = line.partition(" ")
        value = value.strip()
        if label is None:
            if key == "regime":
                label, fields, coefficients, expected = value, {}, [], -1
            elif key in _HEADER_KEYS:
                header[key] = value
                if key == "base_id":
                    base_id = value
            else:
                raise TableParseError(
                    f"line {lineno}: unknown header key {key!r}", base_id
                )
        elif key == "end":
            if len(coefficients) != expected:
                raise TableParseError(
                    f"line {lineno}: expected {expected} coefficients",
                    base_id,
                    label,
                )
            regime = _build_regime(
                label, fields, coefficients, u_left, base_id
            )
            regimes.append(regime)
            u_left = regime.u_right
            label = None
        elif key in _REGIME_KEYS:
            fields[key] = value
            if key == "degree":
                try:
                    degree = int(value)
                except ValueError:
                    raise TableParseError(
                        f"line {lineno}: malformed degree {value!r}",
                        base_id,
                        label,
                    )
                if not 0 <= degree <= MAX_DEGREE:
                    raise TableParseError(
                        f"degree {degree} outside [0, {MAX_DEGREE}]",
                        base_id,
                        label,
                    )
                expected = degree + 1
        else:
            raise TableParseError(
                f"line {lineno}: unknown key {key!r}", base_id, label
            )
    if label is not None:
        raise TableParseError("file ends inside a regime", base_id, label)
    for key in ("base_id", "parameter", "standardized", "anchor"):
        if key not in header:
            raise TableParseError(f"missing header key {key}", base_id)
    if not regimes:
        raise TableParseError("no regimes", base_id)
    if abs(regimes[-1].u_right - config.clip_upper) > 1e-15:
        raise TableAuditError(
            "regimes stop short of 1 - 1e-12", base_id, regimes[-1].label
        )
    anchor = None
    if header["anchor"] != "none":
        anchor = _number(header["anchor"], base_id, None, "anchor")
    switch_constant = None
    if "switch_constant" in header:
        switch_constant = _number(
            header["switch_constant"], base_id, None, "switch_constant"
        )
    if header["standardized"] not in ("true", "false"):
        raise TableParseError("standardized must be true or false", base_id)
    table = InverseCdfTable(
        base_id=base_id,
        parameter=_number(header["parameter"], base_id, None, "parameter"),
        standardized=header["standardized"] == "true",
        regimes=tuple(regimes),
        anchor=anchor,
        switch_constant=switch_constant,
        title=title,
        text=dict(header),
    )
    _check_affine_maps(table)
    return table


def _check_affine_maps(table: InverseCdfTable) -> None:
    for regime in table.regimes:
        if regime.scaling_kind.is_product and table.anchor is None:
            raise TableAuditError(
                "product scaling without an anchor",
                table.base_id,
                regime.label,
            )
        ends = np.array([regime.u_left, regime.u_right])
        with np.errstate(all="ignore"):
            z = regime.k1 * np.asarray(
                regime.scaled(ends, table.parameter, table.anchor)
            ) + regime.k2
        if not np.all(np.abs(z) <= 1.0 + _MAP_SLACK):
            raise TableAuditError(
                f"affine map sends the regime to {z.tolist()}",
                table.base_id,
                regime.label,
            )


def load_table(path: Union[str, Path]) -> InverseCdfTable:
    """Read and parse a table file."""
    path = Path(path)
    return parse_table(path.read_text(), source=path.stem)


def _format(value: float, text: Mapping[str, str], key: str) -> str:
    if key in text:
        return text[key]
    return f"{value:.16e}"


def dump_table(table: InverseCdfTable) -> str:
    """Serialize a table in the file format read by `parse_table`.

    Numbers read from a file are written back with their original decimal
    text; new numbers are written with 17 significant digits.
    """
    lines = []
    if table.title:
        lines.append(f"# {table.title}")
    lines.append(f"base_id {table.base_id}")
    lines.append(
        f"parameter {table.text.get('parameter', repr(table.parameter))}"
    )
    lines.append(f"standardized {'true' if table.standardized else 'false'}")
    if table.anchor is None:
        lines.append("anchor none")
    else:
        lines.append(f"anchor {_format(table.anchor, table.text, 'anchor')}")
    if table.switch_constant is not None:
        value = _format(table.switch_constant, table.text, "switch_constant")
        lines.append(f"switch_constant {value}")
    for regime in table.regimes:
        text = regime.text
        lines.append("")
        lines.append(f"regime {regime.label}")
        lines.append(f"u_right {_format(regime.u_right, text, 'u_right')}")
        lines.append(f"scaling_kind {regime.scaling_kind.value}")
        if regime.gamma_constant is not None:
            value = _format(regime.gamma_constant, text, "gamma_constant")
            lines.append(f"gamma_constant {value}")
        lines.append(f"k1 {_format(regime.k1, text, 'k1')}")
        lines.append(f"k2 {_format(regime.k2, text, 'k2')}")
        lines.append(f"degree {regime.degree}")
        for i, c in enumerate(regime.coefficients):
            lines.append(_format(c, text, f"c{i}"))
        lines.append("end")
    return "\n".join(lines) + "\n"


@dataclass
class RegimeValidation:
    """Accuracy of one regime against an oracle quantile."""

    label: str
    nodes: int
    points: int
    max_error: float


@dataclass
class TableAudit:
    """Structural audit of a table."""

    base_id: str
    grid_size: int
    monotone: bool
    max_seam_jump: float
    worst_seam: str
    nodes: Dict[str, int]


def audit_table(
    table: InverseCdfTable, grid_size: int = 10_000, strict: bool = True
) -> TableAudit:
    """Check monotonicity on a grid and continuity at regime seams.

    Raises
    ------
    hestonsim.exceptions.TableAuditError
        With ``strict``, the quantile decreases somewhere on the grid; the
        error names the regime.
    """
    grid = np.linspace(config.clip_lower, config.clip_upper, grid_size)
    values = np.asarray(table.quantile(grid))
    drops = np.flatnonzero(
        np.diff(values) < -1e-12 * np.maximum(1.0, np.abs(values[1:]))
    )
    monotone = drops.size == 0
    if not monotone and strict:
        where = table.regime_index(grid[drops[0] + 1])
        raise TableAuditError(
            f"quantile decreases near u = {grid[drops[0] + 1]:.12g}",
            table.base_id,
            table.regimes[int(where)].label,
        )
    worst, worst_label = 0.0, ""
    for left, right in zip(table.regimes, table.regimes[1:]):
        u = left.u_right
        jump = abs(
            float(left.evaluate(u, table.parameter, table.anchor))
            - float(right.evaluate(u, table.parameter, table.anchor))
        )
        if jump > worst:
            worst, worst_label = jump, f"{left.label}|{right.label}"
    return TableAudit(
        base_id=table.base_id,
        grid_size=grid_size,
        monotone=monotone,
        max_seam_jump=worst,
        worst_seam=worst_label,
        nodes={r.label: len(r.coefficients) for r in table.regimes},
    )


def _audit_grid(grid_size: int) -> np.ndarray:
    return (np.arange(grid_size) + 0.5) / grid_size


def validation_report(
    table: InverseCdfTable,
    oracle_quantile: Callable[[float], float],
    grid_size: int = 200,
) -> List[RegimeValidation]:
    """Compare the table with an oracle quantile, regime by regime.

    The grid is ``u_i = (i + 1/2) / grid_size``.  Values are compared in the
    variate's own units.
    """
    grid = _audit_grid(grid_size)
    approx = np.asarray(table.variates(grid))
    exact = np.array([oracle_quantile(float(u)) for u in grid])
    errors = np.abs(approx - exact)
    idx = table.regime_index(grid)
    report = []
    for i, regime in enumerate(table.regimes):
        mask = idx == i
        report.append(
            RegimeValidation(
                label=regime.label,
                nodes=len(regime.coefficients),
                points=int(np.count_nonzero(mask)),
                max_error=float(errors[mask].max()) if mask.any() else 0.0,
            )
        )
    return report


def validate_table(
    table: InverseCdfTable,
    oracle_quantile: Callable[[float], float],
    grid_size: int = 200,
) -> float:
    """Largest absolute deviation from an oracle quantile on the grid."""
    report = validation_report(table, oracle_quantile, grid_size)
    return max(r.max_error for r in report)


def sum_table_id(base: int) -> str:
    return f"sp_{base}"


def y2_table_id(denominator: int) -> str:
    return f"y2_{denominator}"


Z_PRIME_ID = "zprime"


class TableSet:
    """The loaded tables, keyed by base id."""

    def __init__(self, tables: Mapping[str, InverseCdfTable]) -> None:
        self._tables = dict(tables)

    @classmethod
    def from_directory(cls, path: Union[str, Path]) -> TableSet:
        """Load every ``*.tbl`` file in a directory.

        Raises
        ------
        hestonsim.exceptions.MissingTableError
            The directory does not exist or holds no tables.
        """
        directory = Path(path)
        if not directory.is_dir():
            raise MissingTableError(f"No tables directory at {directory}")
        tables = {}
        for file in sorted(directory.glob("*.tbl")):
            table = load_table(file)
            tables[table.base_id] = table
        if not tables:
            raise MissingTableError(f"No table files in {directory}")
        return cls(tables)

    def __contains__(self, base_id: object) -> bool:
        return base_id in self._tables

    def __iter__(self) -> Iterator[InverseCdfTable]:
        return iter(self._tables.values())

    def __len__(self) -> int:
        return len(self._tables)

    @property
    def ids(self) -> List[str]:
        return sorted(self._tables)

    def get(self, base_id: str) -> InverseCdfTable:
        try:
            return self._tables[base_id]
        except KeyError:
            raise MissingTableError(f"No table loaded for {base_id}")

    def sum_table(self, base: int) -> InverseCdfTable:
        """Table of ``S^base``."""
        return self.get(sum_table_id(base))

    def y2_table(self, denominator: int) -> InverseCdfTable:
        """Table of ``Y2^(1/denominator)``."""
        return self.get(y2_table_id(denominator))

    def z_prime_table(self) -> InverseCdfTable:
        """Table of ``Z'``."""
        return self.get(Z_PRIME_ID)
