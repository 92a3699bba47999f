"""Exception types shared across the package."""

__all__ = [
    "SimgroupError",
    "DimensionError",
    "InvalidWeightError",
    "NearSingularError",
    "SaturationError",
    "NotContractionError",
    "StabilityError",
    "WindowError",
    "InputFormatError",
]


class SimgroupError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SimgroupError):
    """Operands have incompatible or invalid dimensions."""


class InvalidWeightError(SimgroupError):
    """A weight matrix is not Hermitian positive definite."""


class NearSingularError(SimgroupError):
    """A shifted system is singular or too close to singular to solve."""


class SaturationError(SimgroupError):
    """A matrix exponential would overflow the floating-point range."""


class NotContractionError(SimgroupError):
    """An operator required to be a contraction has norm > 1."""


class StabilityError(SimgroupError):
    """An operation requires a strictly stable generator."""


class WindowError(SimgroupError):
    """A sequence or time argument falls outside the truncation window."""


class InputFormatError(SimgroupError):
    """A matrix or system file violates the JSON schema."""
