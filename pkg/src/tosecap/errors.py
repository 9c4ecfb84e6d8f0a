"""Exception hierarchy shared by every module."""


class ToseError(Exception):
    """Base class for all errors raised by :mod:`tosecap`."""


class InvalidParameterError(ToseError, ValueError):
    """An argument or configuration value is out of its valid range."""


class GenerationError(ToseError):
    """A scenario could not be generated within the retry budget."""


class NumericalFailure(ToseError, ArithmeticError):
    """Cholesky factorization broke down.

    ``pivot`` is the 1-based index of the leading minor that was not positive
    definite, as reported by LAPACK.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class DegenerateSpectrumError(ToseError, ArithmeticError):
    """The evenly spaced spike model is invalid for the given trace.

    ``trials`` lists the failing trial indices when raised from a Monte-Carlo
    loop; it is empty for a single direct call.
    """

    def __init__(self, message, trials=()):
        super().__init__(message)
        self.trials = tuple(trials)


class ReportIOError(ToseError, OSError):
    """Reading or writing a report/scenario file failed."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
