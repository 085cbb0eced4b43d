"""Exception types raised across the package.

Every error is a ``ValueError`` subclass so callers that only care about
"bad input" can catch one thing; the CLI maps them onto exit codes.
"""


class TransqError(ValueError):
    """Base class for all package errors."""


class ModelError(TransqError):
    """An invariant of the queue model is violated."""


class NonPositiveParameter(ModelError):
    pass


class NotStrictlyDecreasing(ModelError):
    pass


class LastRateNonzero(ModelError):
    pass


class PhaseOutOfRange(TransqError, IndexError):
    pass


class IndexOutOfRange(TransqError, IndexError):
    pass


class OrderMismatch(TransqError):
    pass


class NotFeasible(TransqError):
    pass


class EmptyAllocation(TransqError):
    pass


class DegenerateRates(TransqError, ZeroDivisionError):
    pass


class SingularMatrix(TransqError, ZeroDivisionError):
    pass


class RequiresProportionalMode(TransqError):
    pass


class PoleAtArgument(TransqError, ZeroDivisionError):
    pass


class CapExceeded(TransqError):
    """Requested size is above the configured enumeration cap."""
