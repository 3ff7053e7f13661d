"""Handlers served at the root path, ``/``, outside the pricing app.

Only the readiness check lives here.  Pricing routes are in
`hestonsim.handlers.external`.
"""

from fastapi import APIRouter, HTTPException
from safir.metadata import Metadata, get_metadata

from ..config import config
from ..dependencies import tables_dependency

__all__ = ["get_index", "internal_router"]

internal_router = APIRouter()
"""FastAPI router for all internal handlers."""


@internal_router.get(
    "/",
    description=(
        "Return the package metadata once the inverse CDF tables are loaded."
        " Answers 503 before that, so it doubles as a readiness probe."
    ),
    response_model=Metadata,
    response_model_exclude_none=True,
    responses={503: {"description": "Tables not loaded"}},
    summary="Readiness check",
)
async def get_index() -> Metadata:
    if not tables_dependency.loaded:
        raise HTTPException(status_code=503, detail="Tables not loaded")
    return get_metadata(
        package_name="hestonsim",
        application_name=config.name,
    )
