"""Simulation and verification tools for the randomized zeta field and holomorphic chaos on the disc."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.1.0"

from .config import RunConfig
from .errors import (
    AliasingError,
    CapacityError,
    ConfigError,
    DomainError,
    EmbeddingError,
    EstimationError,
    QuadratureError,
    ResolutionWarning,
    UnderflowWarning,
    ZetaLabError,
)

__all__ = [
    "RunConfig",
    "ZetaLabError",
    "DomainError",
    "CapacityError",
    "EmbeddingError",
    "AliasingError",
    "QuadratureError",
    "EstimationError",
    "ConfigError",
    "UnderflowWarning",
    "ResolutionWarning",
    "__version__",
]
