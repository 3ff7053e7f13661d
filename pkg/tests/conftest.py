"""Test fixtures."""

from __future__ import annotations

from pathlib import Path
from typing import AsyncIterator

import pytest
import pytest_asyncio
import structlog
from asgi_lifespan import LifespanManager
from fastapi import FastAPI
from httpx import AsyncClient
from structlog.stdlib import BoundLogger

from hestonsim import main
from hestonsim.config import config, default_tables_dir
from hestonsim.engine import HestonEngine
from hestonsim.sampling import RngStream
from hestonsim.tables import TableSet

from .support.constants import TEST_HOSTNAME, TEST_SEED


@pytest.fixture(scope="session")
def tables() -> TableSet:
    """The tables shipped with the package, loaded once."""
    return TableSet.from_directory(default_tables_dir())


@pytest.fixture
def stream() -> RngStream:
    """A fresh stream with a fixed seed."""
    return RngStream(TEST_SEED)


@pytest.fixture
def logger() -> BoundLogger:
    return structlog.get_logger(config.logger_name)


@pytest.fixture
def engine(tables: TableSet, logger: BoundLogger) -> HestonEngine:
    return HestonEngine(tables, logger, chunk_size=20_000)


@pytest.fixture
def assets() -> Path:
    return Path(__file__).parent / "_assets"


@pytest_asyncio.fixture
async def app() -> AsyncIterator[FastAPI]:
    """Return a configured test application.

    Wraps the application in a lifespan manager so that startup and shutdown
    events are sent during test execution.
    """
    config.tables_dir = default_tables_dir()
    config.max_service_paths = 5_000
    async with LifespanManager(main.app):
        yield main.app


@pytest_asyncio.fixture
async def client(app: FastAPI) -> AsyncIterator[AsyncClient]:
    """Return an ``httpx.AsyncClient`` configured to talk to the test app."""
    url = f"https://{TEST_HOSTNAME}/"
    async with AsyncClient(app=app, base_url=url) as client:
        yield client
