"""Exception types shared across the package."""


class TQFError(Exception):
    """Base class for all package errors."""


class InvalidDegreeError(TQFError, ValueError):
    pass


class DegreeMismatchError(TQFError, ValueError):
    pass


class ArityError(TQFError, ValueError):
    pass


class InvalidPrimeError(TQFError, ValueError):
    pass


class ConsistencyError(TQFError, ArithmeticError):
    """An exactness check failed; this indicates a bug, never bad input."""


class ParseError(TQFError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BadMagicError(ParseError):
    pass


class TruncatedError(ParseError):
    pass


class ExponentRangeError(ParseError):
    pass


class ZeroCoefficientError(ParseError):
    pass


class EmptyPolynomialError(TQFError, ValueError):
    pass


class StackUnderflowError(TQFError, IndexError):
    pass


class TreeStateError(TQFError, RuntimeError):
    pass


class CorruptCheckpointError(TQFError):
    pass


class SingularFormError(TQFError, ValueError):
    pass


class BadReductionError(TQFError, ValueError):
    pass


class ShapeError(TQFError, ValueError):
    pass


class CountingError(TQFError, AssertionError):
    """A point count violated the Weil bound."""


class MemoryBudgetError(TQFError, MemoryError):
    pass
