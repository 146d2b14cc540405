"""Exception hierarchy shared by all modules."""


class IQCoherenceError(Exception):
    """Base class for library errors."""


class NonHermitian(IQCoherenceError, ValueError):
    pass


class DimensionMismatch(IQCoherenceError, ValueError):
    pass


class IndexOutOfRange(IQCoherenceError, IndexError):
    pass


class NotAState(IQCoherenceError, ValueError):
    pass


class SupportViolation(IQCoherenceError, ValueError):
    pass


class InfiniteValue(IQCoherenceError, ArithmeticError):
    pass


class RangeError(IQCoherenceError, ValueError):
    pass


class NormalizationError(IQCoherenceError, ValueError):
    pass


class NotIsometry(IQCoherenceError, ValueError):
    pass


class RankTooHigh(IQCoherenceError, ValueError):
    pass


class ParseError(IQCoherenceError, ValueError):
    pass


class MaxIterations(IQCoherenceError, RuntimeError):
    """Solver budget exhausted; ``solution`` carries the best bounds found."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class UnknownMeasure(IQCoherenceError, KeyError):
    pass
