"""Exception hierarchy shared across the package.

The CLI maps these onto stable exit codes: ``InputError`` -> 2,
``UnsupportedError`` -> 3, ``MissingAssumptionError`` -> 4.
"""


class ForecastError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ForecastError):
    """Invalid values, parameters or violated preconditions."""


class UnsupportedError(ForecastError):
    """The requested operation cannot be supported by this forecast type."""


class MissingAssumptionError(ForecastError):
    """An upward conversion was requested without the structural inputs
    (copula, tail model, calibration data) it needs."""


class FitConvergenceError(InputError):
    """An iterative fit failed to converge; carries the last iterate."""

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
