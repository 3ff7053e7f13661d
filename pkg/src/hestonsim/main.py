"""The hestonsim pricing service.

The application is built at import time.  Its pricing routes are mounted
under ``/{config.name}`` as a separate FastAPI app with its own OpenAPI
documentation; the bare root only answers health checks.
"""

from importlib.metadata import metadata, version

import structlog
from fastapi import FastAPI, Request, status
from fastapi.responses import JSONResponse
from safir.logging import configure_logging
from safir.middleware.x_forwarded import XForwardedMiddleware

from .config import config
from .dependencies import tables_dependency
from .exceptions import (
    InvalidArgumentError,
    MissingTableError,
    NumericFailureError,
    RunawayRejectionError,
)
from .handlers.external import external_router
from .handlers.internal import internal_router

__all__ = ["app", "config"]

_UNSERVABLE = (
    InvalidArgumentError,
    NumericFailureError,
    RunawayRejectionError,
)
"""Errors meaning the request's parameters cannot be priced."""


configure_logging(
    profile=config.profile,
    log_level=config.log_level,
    name=config.logger_name,
    add_timestamp=True,
)

app = FastAPI()
"""The main FastAPI application for hestonsim."""

_pricing = FastAPI(
    title="hestonsim",
    description=metadata("hestonsim")["Summary"],
    version=version("hestonsim"),
)
_pricing.include_router(external_router)


async def _unservable_handler(
    request: Request, exc: Exception
) -> JSONResponse:
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": str(exc)},
    )


async def _missing_table_handler(
    request: Request, exc: Exception
) -> JSONResponse:
    logger = structlog.get_logger(config.logger_name)
    logger.error("Table missing while pricing", error=str(exc))
    return JSONResponse(
        status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
        content={"detail": str(exc)},
    )


for _error in _UNSERVABLE:
    _pricing.add_exception_handler(_error, _unservable_handler)
_pricing.add_exception_handler(MissingTableError, _missing_table_handler)

app.include_router(internal_router)
app.mount(f"/{config.name}", _pricing)


@app.on_event("startup")
async def startup_event() -> None:
    logger = structlog.get_logger(config.logger_name)
    app.add_middleware(XForwardedMiddleware)
    await tables_dependency.initialize(logger)


@app.on_event("shutdown")
async def shutdown_event() -> None:
    await tables_dependency.aclose()
