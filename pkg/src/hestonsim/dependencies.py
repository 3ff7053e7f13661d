"""FastAPI dependencies for hestonsim."""

from typing import Optional

from fastapi import Depends
from safir.dependencies.logger import logger_dependency
from structlog.stdlib import BoundLogger

from .config import config
from .engine import HestonEngine
from .tables import TableSet

__all__ = ["TablesDependency", "tables_dependency"]


class TablesDependency:
    """Constructs a pricing engine that shares one loaded table set.

    The tables are read once at startup and are only read afterwards, so a
    single set serves every request.
    """

    def __init__(self) -> None:
        self._tables: Optional[TableSet] = None

    async def __call__(
        self, logger: BoundLogger = Depends(logger_dependency)
    ) -> HestonEngine:
        assert self._tables, "tables_dependency is not initialized"
        return HestonEngine(self._tables, logger)

    @property
    def loaded(self) -> bool:
        return self._tables is not None

    @property
    def tables(self) -> TableSet:
        assert self._tables, "tables_dependency is not initialized"
        return self._tables

    async def initialize(self, logger: BoundLogger) -> None:
        """Load the tables from ``config.tables_dir``.

        This must be called during application startup.
        """
        self._tables = TableSet.from_directory(config.tables_dir)
        logger.info(
            "Loaded inverse CDF tables",
            tables_dir=config.tables_dir,
            count=len(self._tables),
        )

    async def aclose(self) -> None:
        """Release the tables."""
        self._tables = None


tables_dependency = TablesDependency()
"""The dependency that will return a `HestonEngine` over the shared tables."""
