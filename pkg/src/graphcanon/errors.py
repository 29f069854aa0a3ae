"""Exception hierarchy.

Every error raised by the library derives from :class:`GraphCanonError`.
Errors that mean "the input is fine as data but violates a mathematical
hypothesis" derive from :class:`PreconditionError`; the CLI maps those to
exit code 3 and input/format problems (:class:`InputError`) to exit code 2.
"""


class GraphCanonError(Exception):
    pass


class InputError(GraphCanonError):
    pass


class PreconditionError(GraphCanonError):
    pass


class NonFiniteError(InputError, ValueError):
    pass


class NotSquare(InputError, ValueError):
    pass


class ShapeMismatch(InputError, ValueError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DimensionMismatch(InputError):
    pass


class NonFiniteEntry(InputError):
    pass


class NoConvergence(PreconditionError):
    pass


class ClusterAmbiguity(PreconditionError):
    pass


class NotNonderogatory(PreconditionError):
    pass


class RepeatedEigenvalue(PreconditionError):
    pass


class AllZero(GraphCanonError, ValueError):
    pass


class NonzeroCrossBlock(GraphCanonError):
    pass


class LengthTooLarge(GraphCanonError, ValueError):
    pass


# graph errors


class IndexOutOfRange(GraphCanonError, IndexError):
    pass


class CycleError(GraphCanonError):
    pass


class NotConnected(GraphCanonError):
    pass


class AlreadyConnected(GraphCanonError):
    pass


class BadRatio(GraphCanonError, ValueError):
    pass
