"""Handlers for the app's external root, ``/hestonsim/``."""

from typing import Any, Callable, Dict, TypeVar

from fastapi import APIRouter, Depends, HTTPException
from safir.metadata import get_metadata
from starlette.concurrency import run_in_threadpool

from ..bridge import (
    BridgeConfig,
    acceptance_factor,
    exact_moments_q,
    mean_integral_p,
)
from ..config import config
from ..dependencies import tables_dependency
from ..engine import HestonEngine
from ..models import (
    CASES,
    BridgeMoments,
    BridgeRequest,
    HestonParams,
    Index,
    PricingReport,
    PricingRequest,
    resolve_params,
)

__all__ = ["external_router", "get_index"]

external_router = APIRouter()
"""FastAPI router for all external handlers."""

T = TypeVar("T")


async def _run(func: Callable[..., T], *args: Any, **kwargs: Any) -> T:
    """Run a numerical call off the event loop.

    Library errors propagate to the handlers registered in `hestonsim.main`.
    """
    return await run_in_threadpool(func, *args, **kwargs)


def _params(request: Any) -> HestonParams:
    return resolve_params(request.case, request.params)


def _check_paths(request: PricingRequest) -> None:
    if request.n_paths > config.max_service_paths:
        msg = f"n_paths is limited to {config.max_service_paths}"
        raise HTTPException(status_code=422, detail=msg)


@external_router.get(
    "/",
    description="Returns metadata, named cases and loaded tables.",
    response_model=Index,
    response_model_exclude_none=True,
    summary="Application metadata",
)
async def get_index() -> Index:
    """GET ``/hestonsim/`` (the app's external root)."""
    metadata = get_metadata(
        package_name="hestonsim",
        application_name=config.name,
    )
    return Index(
        metadata=metadata,
        cases=list(CASES),
        tables=tables_dependency.tables.ids,
    )


@external_router.get(
    "/cases",
    description="Parameters of all named cases.",
    response_model=Dict[str, HestonParams],
    summary="Named cases",
)
async def get_cases() -> Dict[str, HestonParams]:
    return CASES


@external_router.get(
    "/cases/{case}",
    description="Parameters of one named case.",
    response_model=HestonParams,
    responses={404: {"description": "Case not found"}},
    summary="Named case",
)
async def get_case(case: str) -> HestonParams:
    if case not in CASES:
        raise HTTPException(status_code=404, detail=f"Unknown case {case}")
    return CASES[case]


@external_router.post(
    "/price/european",
    description="Price a European call by Monte Carlo.",
    response_model=PricingReport,
    summary="European call",
)
async def price_european(
    request: PricingRequest,
    engine: HestonEngine = Depends(tables_dependency),
) -> PricingReport:
    _check_paths(request)
    return await _run(
        engine.price_european_call,
        _params(request),
        request.strike,
        request.n_paths,
        scheme=request.scheme,
        K=request.K,
        seed=request.seed,
        steps=request.steps,
        case=request.case,
    )


@external_router.post(
    "/price/asian",
    description="Price an arithmetic-average Asian call by Monte Carlo.",
    response_model=PricingReport,
    summary="Asian call",
)
async def price_asian(
    request: PricingRequest,
    engine: HestonEngine = Depends(tables_dependency),
) -> PricingReport:
    _check_paths(request)
    return await _run(
        engine.price_asian_call,
        _params(request),
        request.strike,
        request.n_fixings,
        request.n_paths,
        scheme=request.scheme,
        K=request.K,
        seed=request.seed,
        steps=request.steps,
        case=request.case,
    )


@external_router.post(
    "/price/barrier",
    description="Price a digital double no-touch option by Monte Carlo.",
    response_model=PricingReport,
    summary="Double no-touch",
)
async def price_barrier(
    request: PricingRequest,
    engine: HestonEngine = Depends(tables_dependency),
) -> PricingReport:
    _check_paths(request)
    return await _run(
        engine.price_double_no_touch,
        _params(request),
        request.lower,
        request.upper,
        request.steps_per_year,
        request.n_paths,
        scheme=request.scheme,
        K=request.K,
        seed=request.seed,
        steps=request.steps,
        case=request.case,
    )


def _bridge_moments(request: BridgeRequest) -> BridgeMoments:
    params = resolve_params(request.case, request.params)
    v0 = params.v0 if request.v0 is None else request.v0
    dt = params.t if request.dt is None else request.dt
    cfg = BridgeConfig.from_heston(params, v0, request.vt, dt, request.K)
    return BridgeMoments(
        moments=exact_moments_q(cfg, 4),
        acceptance_factor=float(acceptance_factor(cfg)),
        mean_under_proposal=float(mean_integral_p(cfg)),
    )


@external_router.post(
    "/bridge/moments",
    description=(
        "Exact raw moments of the rescaled integral of the variance bridge"
        " and the mean number of proposals needed to draw it."
    ),
    response_model=BridgeMoments,
    summary="Conditional integral moments",
)
async def bridge_moments(request: BridgeRequest) -> BridgeMoments:
    return await _run(_bridge_moments, request)
