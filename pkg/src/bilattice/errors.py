"""Exception hierarchy shared by all modules."""


class BilatticeError(Exception):
    """Base class for errors raised by this package."""


class PoleError(BilatticeError, ZeroDivisionError):
    """A function was evaluated at one of its poles."""


class PrecisionError(BilatticeError, ArithmeticError):
    """A series could not be certified within the term budget."""


class ValidityError(BilatticeError, ValueError):
    """Parameters are outside the range where the measure is positive."""


class DegenerateError(BilatticeError, ArithmeticError):
    """A computation degenerates (vanishing denominator, excluded case)."""


class SingularityError(BilatticeError, ArithmeticError):
    """The forward recurrence hit a movable singularity."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (n={index})")
        self.index = index


class RankError(BilatticeError, ArithmeticError):
    """The discrete inner product became degenerate."""


class ZeroCountError(BilatticeError, ArithmeticError):
    """Fewer sign changes were found than the polynomial degree."""


class LengthError(BilatticeError, ValueError):
    """Sequences of different length were compared."""


class MonotonicityError(BilatticeError, ArithmeticError):
    """b0(t) failed to be strictly monotone on the grid."""

    def __init__(self, message: str, pair=None):
        super().__init__(message)
        self.pair = pair


class PositivityWarning(UserWarning):
    """A computed coefficient violates a_n^2 > 0 or b_n > min(0, 1-beta)."""
