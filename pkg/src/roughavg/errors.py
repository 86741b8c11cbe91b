"""Exception types shared across the package."""


class RoughAvgError(Exception):
    """Base class for all package errors."""


class InvalidInputError(RoughAvgError, ValueError):
    """An argument violates a documented precondition."""


class ConfigurationError(RoughAvgError):
    """An experiment configuration is inconsistent or incomplete."""


class BlowUpError(RoughAvgError, RuntimeError):
    """A trajectory produced a non-finite state; carries the offending step."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class UnsupportedCoefficientError(RoughAvgError):
    """A coefficient function lacks a registered derivative."""
