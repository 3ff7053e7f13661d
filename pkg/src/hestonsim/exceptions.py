"""Exceptions raised by hestonsim."""

from __future__ import annotations

from typing import Any, Dict, Optional

__all__ = [
    "ConvergenceError",
    "CorruptedTableError",
    "InternalConsistencyError",
    "InvalidArgumentError",
    "InversionFailureError",
    "MissingTableError",
    "NumericFailureError",
    "RunawayRejectionError",
    "TableAuditError",
    "TableParseError",
]


class InvalidArgumentError(ValueError):
    """Used when an argument is outside the domain of an operation."""

    pass


class ConvergenceError(Exception):
    """Used when a series did not converge within its term budget.

    Parameters
    ----------
    message : `str`
        Description of the failing series.
    partial : `float`
        The partial sum reached when the budget ran out.
    terms : `int`
        Number of terms that were summed.
    """

    def __init__(self, message: str, partial: float, terms: int) -> None:
        super().__init__(f"{message} (partial {partial!r}, {terms} terms)")
        self.partial = partial
        self.terms = terms


class TableParseError(Exception):
    """Used when a table file cannot be parsed."""

    def __init__(
        self, message: str, base_id: str = "", regime: Optional[str] = None
    ) -> None:
        where = base_id if regime is None else f"{base_id}/{regime}"
        super().__init__(f"{where}: {message}" if where else message)
        self.base_id = base_id
        self.regime = regime


class TableAuditError(TableParseError):
    """Used when a parsed table fails a structural or numerical audit."""

    pass


class CorruptedTableError(Exception):
    """Used when no regime of a loaded table contains a probability."""

    pass


class MissingTableError(Exception):
    """Used when a required base table is not available.

    This is a configuration error: the tables directory does not contain a
    file for the requested base variable.
    """

    pass


class RunawayRejectionError(Exception):
    """Used when acceptance-rejection exceeds its proposal cap.

    Parameters
    ----------
    factor : `float`
        The acceptance factor (mean number of proposals) of the worst bridge.
    proposals : `int`
        Number of proposals made for that bridge.
    bridge : `dict`
        Summary of the bridge configuration for diagnosis.
    """

    def __init__(
        self, factor: float, proposals: int, bridge: Dict[str, Any]
    ) -> None:
        super().__init__(
            f"Rejection cap reached after {proposals} proposals"
            f" (acceptance factor {factor:.6g}, bridge {bridge})"
        )
        self.factor = factor
        self.proposals = proposals
        self.bridge = bridge


class InternalConsistencyError(Exception):
    """Used when a computed quantity violates a mathematical identity."""

    pass


class NumericFailureError(Exception):
    """Used when an oracle computation produced a non-finite value."""

    def __init__(self, message: str, steps: Dict[str, Any]) -> None:
        super().__init__(f"{message} ({steps})")
        self.steps = steps


class InversionFailureError(Exception):
    """Used when a root bracket for CDF inversion cannot be found."""

    pass
