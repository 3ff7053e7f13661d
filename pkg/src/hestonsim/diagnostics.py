"""Per-run diagnostic counters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional

__all__ = ["RunDiagnostics"]


@dataclass
class _HRounding:
    h: float
    h_rounded: float

    @property
    def relative_bias(self) -> float:
        return abs(self.h - self.h_rounded) / self.h


class RunDiagnostics:
    """Collects the diagnostics of one simulation run.

    The numerical kernels do not log.  Instead, anything a user may want to
    know about a run (how many uniforms had to be clipped before a table
    lookup, how many proposals the measure change consumed, how large the
    Poisson level counts got, and how much ``h`` was rounded) is recorded
    here and copied into the run's report.

    Notes
    -----
    A collector has a single owner and does no locking.  Runs that are split
    across workers should give each worker its own collector and combine them
    with `merge`.
    """

    def __init__(self) -> None:
        self.clipped_uniforms = 0
        self.proposals = 0
        self.accepted = 0
        self.max_level_count = 0
        self._h: Optional[_HRounding] = None

    def record_clips(self, count: int) -> None:
        """Record uniforms clipped into the table domain."""
        self.clipped_uniforms += count

    def record_proposals(self, proposals: int, accepted: int) -> None:
        """Record measure-change proposals and the number accepted."""
        self.proposals += proposals
        self.accepted += accepted

    def record_level_count(self, count: int) -> None:
        """Record a Poisson level count of the first bridge component."""
        if count > self.max_level_count:
            self.max_level_count = count

    def record_h(self, h: float, h_rounded: float) -> None:
        """Record the true and rounded ``h = delta / 2``."""
        self._h = _HRounding(h=h, h_rounded=h_rounded)

    @property
    def proposals_mean(self) -> Optional[float]:
        """Mean proposals per accepted conditional integral."""
        if self.accepted == 0:
            return None
        return self.proposals / self.accepted

    @property
    def h(self) -> Optional[float]:
        return None if self._h is None else self._h.h

    @property
    def h_rounded(self) -> Optional[float]:
        return None if self._h is None else self._h.h_rounded

    @property
    def h_relative_bias(self) -> Optional[float]:
        return None if self._h is None else self._h.relative_bias

    def merge(self, other: RunDiagnostics) -> None:
        """Add the counts of another collector to this one."""
        self.clipped_uniforms += other.clipped_uniforms
        self.proposals += other.proposals
        self.accepted += other.accepted
        self.record_level_count(other.max_level_count)
        if other._h is not None:
            self._h = other._h

    def as_dict(self) -> Dict[str, Any]:
        return {
            "clipped_uniforms": self.clipped_uniforms,
            "proposals_mean": self.proposals_mean,
            "max_level_count": self.max_level_count,
            "h": self.h,
            "h_rounded": self.h_rounded,
            "h_relative_bias": self.h_relative_bias,
        }
