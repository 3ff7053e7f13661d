"""Configuration definition."""

from __future__ import annotations

__all__ = ["Configuration", "config", "default_tables_dir"]

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional


def default_tables_dir() -> str:
    """Return the directory of the Chebyshev tables shipped with the
    package."""
    return str(Path(__file__).parent / "data" / "tables")


def _optional_float(name: str) -> Optional[float]:
    value = os.getenv(name)
    return float(value) if value else None


@dataclass
class Configuration:
    """Configuration for hestonsim."""

    name: str = os.getenv("SAFIR_NAME", "hestonsim")
    """The application's name, which doubles as the root HTTP endpoint path.

    Set with the ``SAFIR_NAME`` environment variable.
    """

    profile: str = os.getenv("SAFIR_PROFILE", "development")
    """Application run profile: "development" or "production".

    Set with the ``SAFIR_PROFILE`` environment variable.
    """

    logger_name: str = os.getenv("SAFIR_LOGGER", "hestonsim")
    """The root name of the application's logger.

    Set with the ``SAFIR_LOGGER`` environment variable.
    """

    log_level: str = os.getenv("SAFIR_LOG_LEVEL", "INFO")
    """The log level of the application's logger.

    Set with the ``SAFIR_LOG_LEVEL`` environment variable.
    """

    tables_dir: str = os.getenv("HESTONSIM_TABLES_DIR") or default_tables_dir()
    """Directory holding one ``.tbl`` file per base random variable.

    Set with the ``HESTONSIM_TABLES_DIR`` environment variable.  Defaults to
    the tables shipped inside the package.
    """

    switch_constant: Optional[float] = _optional_float(
        "HESTONSIM_SWITCH_CONSTANT"
    )
    """Multiplier of ``P + 3/2`` at which the parabolic cylinder function
    switches from its power series to its asymptotic series.

    Unset means the binary64 crossover ``5.25 / (P + 3/2)`` for each ``P``.
    A table header may override it for that table.
    """

    rejection_cap: int = int(os.getenv("HESTONSIM_REJECTION_CAP") or "1000000")
    """Maximum number of acceptance-rejection proposals for a single
    conditional integral before the run is aborted.
    """

    chunk_size: int = int(os.getenv("HESTONSIM_CHUNK_SIZE") or "100000")
    """Number of paths simulated together in one vectorized batch.  Each
    batch draws from its own child random stream.
    """

    clip_lower: float = 1e-12
    """Smallest probability passed to a Chebyshev inverse CDF."""

    clip_upper: float = 1.0 - 1e-12
    """Largest probability passed to a Chebyshev inverse CDF."""

    h_decimals: int = int(os.getenv("HESTONSIM_H_DECIMALS") or "3")
    """Decimal places kept when rounding ``h = delta / 2`` for the X2
    decomposition.  Values above 3 need tables for the extra denominators.
    """

    baseline_inner_terms: int = int(
        os.getenv("HESTONSIM_BASELINE_INNER_TERMS") or "200"
    )
    """Gamma terms kept per level by the truncated-series X2 baseline."""

    max_service_paths: int = int(
        os.getenv("HESTONSIM_MAX_SERVICE_PATHS") or "1000000"
    )
    """Largest path count accepted by the HTTP pricing routes."""


config = Configuration()
"""Configuration for hestonsim."""
