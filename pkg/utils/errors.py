"""Exception hierarchy shared by the engine, the services and the CLI."""

from typing import Any, Optional


class ToolkitError(Exception):
    """Base class for every error raised on purpose by this package."""


class UsageError(ToolkitError, ValueError):
    """Bad input from the caller: flags, constants, bindings, labels."""


class ExprSyntaxError(UsageError):
    """Source text does not conform to the expression grammar."""

    def __init__(self, message: str, offset: int, source: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.source = source


class UnknownIdentifierError(ExprSyntaxError):
    """An identifier other than t, x, u or a known function name."""

    def __init__(self, name: str, offset: int, source: str = ""):
        super().__init__(f"unknown identifier {name!r}", offset, source)
        self.name = name


class MissingBindingError(UsageError):
    """A variable occurring in an expression has no value at the point."""

    def __init__(self, name: str):
        super().__init__(f"no value bound for variable {name!r}")
        self.name = name


class CatalogBoundError(UsageError):
    """Requested catalog member lies outside the catalog."""


class UnknownLabelError(UsageError):
    """Heat catalog label that does not parse."""


class InvalidTransformationError(UsageError):
    """Point transformation parameters violate the group invariant."""


class DomainError(ToolkitError, ArithmeticError):
    """Evaluation hit a pole or a negative square-root argument."""

    def __init__(self, message: str, subexpression: Optional[Any] = None):
        super().__init__(message)
        self.subexpression = subexpression


class LinearDependenceError(ToolkitError):
    """A determinant that must be nonzero vanishes identically."""


class DegenerateInputError(ToolkitError):
    """Input function is identically zero where that is not allowed."""


class GenericityError(ToolkitError):
    """The ansatz integrals are undefined for this solution."""


class SpanMismatchError(ToolkitError):
    """A vector field expected in the Lie algebra falls outside its span."""
