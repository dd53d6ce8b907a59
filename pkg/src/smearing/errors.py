"""Exception types raised by the smearing toolkit."""


class SmearingError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SmearingError, ValueError):
    """Operand lengths disagree with the ring degree or distribution size."""


class DomainError(SmearingError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class CapacityError(SmearingError, ValueError):
    """The request exceeds a hard size guard (e.g. subset enumeration)."""


class NotFoundError(SmearingError, LookupError):
    """A search over a bounded range produced no admissible value."""


class PreconditionError(SmearingError, ValueError):
    """Instance parameters do not satisfy an operation's precondition."""


class InputExhaustedError(SmearingError, RuntimeError):
    """A sample or residue source ran out before the procedure finished."""
