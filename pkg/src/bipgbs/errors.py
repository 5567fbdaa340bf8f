"""Exception hierarchy shared by all modules."""


class BipgbsError(Exception):
    """Base class for every error raised by this package."""


class InputError(BipgbsError, ValueError):
    """Malformed or out-of-range arguments."""


class NumericalError(BipgbsError, ArithmeticError):
    """A computation failed to produce a trustworthy number."""


class ConvergenceError(NumericalError):
    pass


class InvalidSingularValue(InputError):
    """A singular value is not in ``[0, 1)``; the matrix must be rescaled."""


class InvalidStateError(NumericalError):
    """A covariance-derived quantity violated a positivity requirement."""


class OutsideValidityRegion(InputError):
    """Bound requested for parameters where it has not been established."""


class IllConditionedError(NumericalError):
    """Interpolation design matrix too ill-conditioned to trust the result."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
