"""Exception types shared across the package."""


class JitterkitError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(JitterkitError, ValueError):
    """A parameter is outside its admissible range."""


class IngestionError(JitterkitError, ValueError):
    """A data file or matrix violates the declared schema."""


class SchemaError(JitterkitError, ValueError):
    """Column schema inconsistent with the requested operation."""


class DegenerateColumnError(JitterkitError, ValueError):
    """A column carries no usable variation (single level, zero variance)."""


class InsufficientDataError(JitterkitError, ValueError):
    """Too few observations for the requested fit."""


class NoLocalDataError(JitterkitError, RuntimeError):
    """No estimator mass near the evaluation point (vanishing denominator)."""


class UndefinedConditionalError(JitterkitError, ValueError):
    """Conditioning event has probability zero under the model."""


class NumericalError(JitterkitError, RuntimeError):
    """A numerical routine failed to converge.

    Carries ``best_estimate`` so callers can inspect the partial result.
    """

    def __init__(self, message: str, best_estimate: float | None = None):
        super().__init__(message)
        self.best_estimate = best_estimate


class QuantileSearchError(JitterkitError, RuntimeError):
    """Requested quantile level unreachable inside the search window.

    ``attained`` is the supremum of the estimated CDF over the window.
    """

    def __init__(self, message: str, attained: float):
        super().__init__(message)
        self.attained = attained
