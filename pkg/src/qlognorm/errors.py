"""Shared exception types."""


class QlognormError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QlognormError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DataError(QlognormError, ValueError):
    """Input data unusable: empty, non-numeric, degenerate, or outside
    the support of the requested model."""


class ConvergenceError(QlognormError, RuntimeError):
    """An iterative routine exhausted its budget without meeting its
    tolerance; the partial result is never returned silently."""


class DivergenceError(QlognormError, ArithmeticError):
    """The requested quantity is infinite for the given parameters."""
