"""Exception types shared across the package."""


class QHOError(Exception):
    """Base class for all errors raised by this package."""


class ZeroInversion(QHOError, ZeroDivisionError):
    pass


class TranscendentalInversion(QHOError, ArithmeticError):
    """The element involves the formal indeterminate t and has no inverse in
    the polynomial ring over the tower."""


class TowerMismatch(QHOError, ValueError):
    pass


class ScalarSyntaxError(QHOError, ValueError):
    pass


class GuardrailError(QHOError, ValueError):
    pass


class SeedCollision(QHOError, ValueError):
    pass


class OutOfFragment(QHOError, KeyError):
    pass


class InfinitePoint(QHOError, ValueError):
    pass


class OddN(QHOError):
    """A sign -1 is needed at an inductive step but -1 is not an N-th root of unity."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class BadIndex(QHOError, IndexError):
    pass


class BlowupGuard(QHOError):
    pass


class NotInvariant(QHOError, ValueError):
    pass


class FiberMismatch(QHOError, ValueError):
    pass


class NotDescending(QHOError, ValueError):
    pass


class FormulaSyntaxError(QHOError, SyntaxError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position
