"""Models for hestonsim."""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, Field, root_validator
from safir.metadata import Metadata as SafirMetadata

from .bridge import X2Mode
from .exceptions import InvalidArgumentError

__all__ = [
    "CASES",
    "BridgeMoments",
    "BridgeRequest",
    "HestonParams",
    "Index",
    "MomentErrorRow",
    "MomentReport",
    "PricingReport",
    "PricingRequest",
    "Product",
    "RunConfig",
    "Scheme",
    "resolve_params",
]


class HestonParams(BaseModel):
    """Parameters of the Heston model.

    The field names follow the usual parameter tables: ``r`` is the
    risk-free rate, which is also the drift of the asset under the pricing
    measure.
    """

    kappa: float = Field(..., title="Mean-reversion rate", gt=0, example=0.5)

    theta: float = Field(..., title="Long-run variance", gt=0, example=0.04)

    sigma: float = Field(..., title="Volatility of variance", gt=0, example=1)

    rho: float = Field(
        ..., title="Asset/variance correlation", ge=-1, le=1, example=-0.9
    )

    t: float = Field(..., title="Horizon in years", gt=0, example=10)

    v0: float = Field(..., title="Initial variance", ge=0, example=0.04)

    s0: float = Field(..., title="Initial asset price", gt=0, example=100)

    r: float = Field(0.0, title="Risk-free rate", example=0.0)

    class Config:
        allow_mutation = False

    @property
    def mu(self) -> float:
        """Drift of the log price, equal to ``r``."""
        return self.r

    @property
    def delta(self) -> float:
        """Degrees of freedom ``4 kappa theta / sigma**2``."""
        return 4.0 * self.kappa * self.theta / self.sigma**2


CASES: Dict[str, HestonParams] = {
    "case1": HestonParams(
        kappa=0.5, theta=0.04, sigma=1.0, rho=-0.9, t=10, v0=0.04, s0=100
    ),
    "case2": HestonParams(
        kappa=0.3, theta=0.04, sigma=0.9, rho=-0.5, t=15, v0=0.04, s0=100
    ),
    "case3": HestonParams(
        kappa=1.0,
        theta=0.09,
        sigma=1.0,
        rho=-0.3,
        t=5,
        v0=0.09,
        s0=100,
        r=0.05,
    ),
    "case4": HestonParams(
        kappa=6.21,
        theta=0.019,
        sigma=0.61,
        rho=-0.7,
        t=1,
        v0=0.010201,
        s0=100,
        r=0.0319,
    ),
    "asian": HestonParams(
        kappa=1.0407,
        theta=0.0586,
        sigma=0.5196,
        rho=-0.6747,
        t=4,
        v0=0.0194,
        s0=100,
    ),
    "barrier": HestonParams(
        kappa=0.5, theta=0.04, sigma=1.0, rho=0.0, t=1, v0=0.04, s0=100
    ),
}
"""Named parameter sets used by the pricing experiments."""


class Scheme(Enum):
    """Simulation schemes for the asset and variance."""

    EXACT_DIRECT = "exact-direct"
    """Exact transitions, X2 drawn by direct inversion."""

    EXACT_GAMMA_BASELINE = "exact-gamma-baseline"
    """Exact transitions, X2 drawn from truncated gamma series."""

    EULER_FT = "euler-ft"
    """Full-truncation Euler discretization."""

    @property
    def is_exact(self) -> bool:
        return self is not Scheme.EULER_FT

    @property
    def x2_mode(self) -> X2Mode:
        if self is Scheme.EXACT_GAMMA_BASELINE:
            return X2Mode.TRUNCATION_BASELINE
        return X2Mode.DIRECT_INVERSION


class Product(Enum):
    """Options priced by the engine."""

    EUROPEAN = "european"
    ASIAN = "asian"
    BARRIER = "barrier"


class PricingReport(BaseModel):
    """Result of one Monte Carlo pricing run."""

    product: Product = Field(..., title="Priced option")

    case: Optional[str] = Field(None, title="Named case", example="case1")

    scheme: Scheme = Field(..., title="Simulation scheme")

    strike: Optional[float] = Field(None, title="Strike", example=100)

    estimate: float = Field(..., title="Discounted price estimate")

    std_error: float = Field(..., title="Standard error", ge=0)

    n_paths: int = Field(..., title="Number of simulated paths", ge=1)

    K: int = Field(..., title="Truncation level", ge=0, example=1)

    steps: Optional[int] = Field(
        None, title="Euler time steps to the horizon"
    )

    proposals_mean: Optional[float] = Field(
        None, title="Mean acceptance-rejection proposals per integral"
    )

    seconds: float = Field(..., title="Wall-clock time", ge=0)

    h: Optional[float] = Field(None, title="h = delta / 2")

    h_rounded: Optional[float] = Field(
        None, title="h as rounded for the X2 decomposition"
    )

    h_relative_bias: Optional[float] = Field(
        None, title="Relative rounding bias |h - h_rounded| / h"
    )

    clipped_uniforms: int = Field(
        0, title="Uniforms clipped before a table lookup", ge=0
    )

    max_level_count: int = Field(
        0, title="Largest Poisson level count drawn", ge=0
    )

    def csv_row(self) -> Dict[str, Any]:
        """The fields written by the command-line interface."""
        return {
            "scheme": self.scheme.value,
            "case": self.case or "",
            "strike": "" if self.strike is None else self.strike,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "n_paths": self.n_paths,
            "K": self.K,
            "proposals_mean": (
                "" if self.proposals_mean is None else self.proposals_mean
            ),
            "seconds": self.seconds,
        }


class MomentErrorRow(BaseModel):
    """One order of one moment-error experiment."""

    case: str = Field("", title="Named case")

    v_t: float = Field(..., title="Variance at the end of the bridge", ge=0)

    K: int = Field(..., title="Truncation level", ge=0)

    order: int = Field(..., title="Moment order", ge=1, le=4)

    sample_moment: float = Field(..., title="Monte Carlo raw moment")

    exact_moment: float = Field(..., title="Raw moment from the transform")

    abs_error: float = Field(..., title="Absolute error", ge=0)

    three_se: float = Field(..., title="Three standard errors", ge=0)

    @property
    def significant(self) -> bool:
        """Whether the error exceeds three standard errors."""
        return self.abs_error > self.three_se

    def csv_row(self) -> Dict[str, Any]:
        row = self.dict()
        row["significant"] = self.significant
        return row


class MomentReport(BaseModel):
    """All rows of a moment-error experiment plus the X2 rounding bias."""

    rows: List[MomentErrorRow] = Field(..., title="Per-order errors")

    x2_mean: float = Field(..., title="Exact X2 mean under the true h")

    x2_mean_rounded: float = Field(
        ..., title="Exact X2 mean under the rounded h"
    )


class RunConfig(BaseModel):
    """Settings of a command-line run, usually read from a YAML file.

    Any model parameter left unset comes from ``case``.
    """

    case: Optional[str] = Field(None, title="Named case to start from")

    kappa: Optional[float] = Field(None, gt=0)

    theta: Optional[float] = Field(None, gt=0)

    sigma: Optional[float] = Field(None, gt=0)

    rho: Optional[float] = Field(None, ge=-1, le=1)

    t: Optional[float] = Field(None, gt=0)

    v0: Optional[float] = Field(None, ge=0)

    s0: Optional[float] = Field(None, gt=0)

    r: Optional[float] = None

    scheme: Scheme = Scheme.EXACT_DIRECT

    K: int = Field(1, ge=0)

    n_paths: int = Field(100_000, ge=1)

    steps: Optional[int] = Field(None, ge=1)

    seed: int = 0

    tables_dir: Optional[str] = None

    output: Optional[str] = None

    strike: float = Field(100.0, ge=0)

    lower: float = Field(90.0, gt=0)

    upper: float = Field(110.0, gt=0)

    n_fixings: Optional[int] = Field(None, ge=1)

    steps_per_year: int = Field(1, ge=1)

    v_t: List[float] = Field(default_factory=lambda: [0.04])

    K_values: List[int] = Field(default_factory=lambda: [1])

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> RunConfig:
        """Read a YAML mapping of settings."""
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise InvalidArgumentError(f"{path}: expected a mapping")
        return cls.parse_obj(data)

    def merged(self, overrides: Dict[str, Any]) -> RunConfig:
        """This configuration with non-None ``overrides`` applied."""
        data = self.dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.parse_obj(data)

    def params(self) -> HestonParams:
        """The model parameters: the named case overlaid with any
        explicitly set parameter."""
        fields = ("kappa", "theta", "sigma", "rho", "t", "v0", "s0", "r")
        explicit = {k: getattr(self, k) for k in fields}
        return resolve_params(self.case, None, explicit)


def resolve_params(
    case: Optional[str],
    params: Optional[HestonParams],
    overrides: Optional[Dict[str, Any]] = None,
) -> HestonParams:
    """Build model parameters from a named case and explicit values.

    Raises
    ------
    hestonsim.exceptions.InvalidArgumentError
        The case is unknown, or neither a case nor a complete parameter set
        was given.
    """
    data: Dict[str, Any] = {}
    if case is not None:
        if case not in CASES:
            raise InvalidArgumentError(f"Unknown case {case}")
        data.update(CASES[case].dict())
    if params is not None:
        data.update(params.dict())
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    missing = {"kappa", "theta", "sigma", "rho", "t", "v0", "s0"} - set(data)
    if missing:
        names = ", ".join(sorted(missing))
        raise InvalidArgumentError(f"Missing model parameters: {names}")
    return HestonParams.parse_obj(data)


class PricingRequest(BaseModel):
    """Request to price an option."""

    case: Optional[str] = Field(None, title="Named case", example="case1")

    params: Optional[HestonParams] = Field(
        None, title="Explicit model parameters"
    )

    scheme: Scheme = Field(Scheme.EXACT_DIRECT, title="Simulation scheme")

    K: int = Field(1, title="Truncation level", ge=0)

    n_paths: int = Field(10_000, title="Number of paths", ge=1)

    steps: Optional[int] = Field(
        None, title="Euler steps to the horizon", ge=1
    )

    seed: int = Field(0, title="Random seed")

    strike: float = Field(100.0, title="Strike", ge=0)

    n_fixings: Optional[int] = Field(
        None, title="Asian fixings (default: one per year)", ge=1
    )

    lower: float = Field(90.0, title="Lower barrier", gt=0)

    upper: float = Field(110.0, title="Upper barrier", gt=0)

    steps_per_year: int = Field(1, title="Barrier monitoring dates per year")

    @root_validator(skip_on_failure=True)
    def _check_source(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if values.get("case") is None and values.get("params") is None:
            raise ValueError("Either case or params is required")
        return values


class BridgeRequest(BaseModel):
    """Request for the exact moments of a conditional integral."""

    case: Optional[str] = Field(None, title="Named case", example="case1")

    params: Optional[HestonParams] = Field(
        None, title="Explicit model parameters"
    )

    v0: Optional[float] = Field(
        None, title="Start variance (default: the model's v0)", ge=0
    )

    vt: float = Field(..., title="End variance", ge=0, example=0.04)

    dt: Optional[float] = Field(
        None, title="Step length (default: the horizon)", gt=0
    )

    K: int = Field(1, title="Truncation level", ge=0)

    @root_validator(skip_on_failure=True)
    def _check_source(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if values.get("case") is None and values.get("params") is None:
            raise ValueError("Either case or params is required")
        return values


class BridgeMoments(BaseModel):
    """Exact moments of the rescaled conditional integral."""

    moments: List[float] = Field(..., title="Raw moments, orders 1 to 4")

    acceptance_factor: float = Field(
        ..., title="Mean proposals per accepted draw", ge=1
    )

    mean_under_proposal: float = Field(
        ..., title="Mean of the squared Bessel bridge integral"
    )


class Index(BaseModel):
    """Metadata returned by the external root URL of the application."""

    metadata: SafirMetadata = Field(..., title="Package metadata")

    cases: List[str] = Field(..., title="Named parameter sets")

    tables: List[str] = Field(..., title="Loaded inverse CDF tables")
