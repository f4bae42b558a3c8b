"""Exception types raised by exchange_qc."""


class ExchangeError(Exception):
    """Base class for all package errors."""


class DomainError(ExchangeError, ValueError):
    """Input outside the mathematical domain of an operation."""


class InvalidPairError(DomainError):
    """An exchange pair (i, j) with i == j."""


class InvalidStepError(DomainError):
    """A parallel step containing the same pair more than once."""


class InvalidSequenceError(DomainError):
    """A pulse sequence violating its layout or mode constraints."""


class NoSolutionError(ExchangeError):
    """A requested decomposition does not exist for the given inputs."""


class ScheduleFormatError(ExchangeError, ValueError):
    """A schedule file that cannot be parsed or validated."""
