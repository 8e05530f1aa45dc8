"""Exception types shared across the engine."""


class SpinecellError(Exception):
    """Base class for all errors raised by this package."""


class GluingSyntaxError(SpinecellError):
    """Malformed gluing file; carries line and column."""

    def __init__(self, message, line, column=0):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class EmptyTriangulation(SpinecellError):
    pass


class InvalidGluing(SpinecellError):
    """Non-involutive face pairing, out-of-range index, or a face glued to itself."""


class UnknownSimplex(SpinecellError):
    pass


class MoveNotApplicable(SpinecellError):
    pass


class InvalidParameters(SpinecellError):
    pass


class OverflowGuard(SpinecellError):
    """An integer matrix entry exceeded the configured guard threshold."""


class DisconnectedComplex(SpinecellError):
    pass


class NotFree(SpinecellError):
    pass


class NotIsolated(SpinecellError):
    pass


class NotSeparating(SpinecellError):
    pass


class NotInner(SpinecellError):
    pass


class PreconditionUnmet(SpinecellError):
    pass


class Anomaly(SpinecellError):
    """A certified compound move could not restore the state invariants.

    This is a first-class outcome, not a bug marker: the recognizer converts
    it into an ANOMALY verdict and preserves the trace for forensics.
    """
