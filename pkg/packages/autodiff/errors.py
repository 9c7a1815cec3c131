"""Autodiff error types."""


class AutodiffError(Exception):
    """Base class for tensor arithmetic and differentiation failures."""

    pass


class ShapeError(AutodiffError, ValueError):
    """Raised when operand shapes are incompatible or an axis is invalid."""

    pass


class DomainError(AutodiffError, ValueError):
    """Raised when an operation is evaluated outside its mathematical domain."""

    pass


class ContractError(AutodiffError):
    """Raised when a caller violates an operation's precondition."""

    pass
