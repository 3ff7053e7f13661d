"""Exact simulation of the Heston model by direct inversion."""

from importlib.metadata import PackageNotFoundError, version

from .config import Configuration
from .engine import HestonEngine
from .models import HestonParams, PricingReport, Scheme
from .tables import TableSet

__all__ = [
    "__version__",
    "Configuration",
    "HestonEngine",
    "HestonParams",
    "PricingReport",
    "Scheme",
    "TableSet",
]

__version__: str
"""The application version string (PEP 440 / SemVer compatible)."""

try:
    __version__ = version(__name__)
except PackageNotFoundError:
    # package is not installed
    __version__ = "0.0.0"
