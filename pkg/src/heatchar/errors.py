"""Exception hierarchy shared by all heatchar modules."""


class HeatcharError(Exception):
    """Base class for every error raised by this package."""


class ArgumentError(HeatcharError, ValueError):
    """An operation was called with arguments outside its domain."""


class ValidationError(HeatcharError, ValueError):
    """Input data violates a structural invariant (symmetry, orthogonality, ...)."""


class ModelError(HeatcharError):
    """A spectral model is internally inconsistent."""


class ResourceError(HeatcharError):
    """A computation would exceed its level or size budget."""


class FitError(HeatcharError):
    """Asymptotic coefficient extraction is ill-conditioned."""


class ConfigError(HeatcharError):
    """A run configuration failed schema validation."""
