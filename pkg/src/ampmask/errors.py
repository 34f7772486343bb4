"""Exception types shared across the package."""


class AmpMaskError(Exception):
    """Base class for all errors raised by ampmask."""


class ValidationError(AmpMaskError, ValueError):
    """A distribution, channel or parameter set violates its invariants."""


class UsageError(AmpMaskError, ValueError):
    """An operation was called with arguments it cannot accept."""


class PreconditionError(AmpMaskError):
    """A structural hypothesis (e.g. degradedness) required by a bound fails."""


class ConsistencyError(AmpMaskError, ArithmeticError):
    """An internal numerical guarantee did not hold."""
