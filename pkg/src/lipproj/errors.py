"""Shared exception types."""


class LipprojError(Exception):
    """Base class for all package-specific errors."""


class DomainError(LipprojError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class DimensionError(LipprojError, ValueError):
    """Vector or matrix dimensions are invalid or inconsistent."""


class ParameterError(LipprojError, ValueError):
    """A parameter violates its documented range."""


class ResourceError(LipprojError, RuntimeError):
    """A desk-scale resource cap would be exceeded."""


class GradientInconsistencyError(LipprojError, RuntimeError):
    """An analytic gradient disagrees with finite differences."""


class ContractError(LipprojError, RuntimeError):
    """An object or result violates one of its structural invariants."""
