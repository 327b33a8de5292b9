"""Exception and warning types shared across the package."""


class ZetaLabError(Exception):
    """Base class for all errors raised by zetalab."""


class DomainError(ZetaLabError, ValueError):
    """An argument lies outside the domain of the function."""


class CapacityError(ZetaLabError):
    """A request exceeds the sieving capacity."""

    def __init__(self, message, required_bound=None):
        super().__init__(message)
        self.required_bound = required_bound


class EmbeddingError(ZetaLabError):
    """Circulant embedding produced a matrix that is not positive semidefinite."""

    def __init__(self, message, min_eigenvalue):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class AliasingError(ZetaLabError):
    """The synthesis grid cannot represent the requested Fourier modes."""


class QuadratureError(ZetaLabError):
    """Adaptive quadrature failed to converge."""


class EstimationError(ZetaLabError):
    """A regression or estimator was given a degenerate design."""


class ConfigError(ZetaLabError, ValueError):
    """Invalid run configuration."""


class UnderflowWarning(RuntimeWarning):
    """A result underflowed to zero in double precision."""


class ResolutionWarning(RuntimeWarning):
    """The grid is too coarse for the roughness of the field."""
