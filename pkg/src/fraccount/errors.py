"""Exception hierarchy shared by the whole package.

Two broad families matter for callers (and for the CLI exit-code contract):
argument-level problems (``ConstraintError``, ``UnsupportedError``,
``InsufficientDataError``) and numeric-evaluation failures (everything
under ``NumericError``).
"""


class FraccountError(Exception):
    """Base class for all package-specific errors."""


class ConstraintError(FraccountError, ValueError):
    """A parameter or argument violates a documented constraint."""


class UnsupportedError(FraccountError, ValueError):
    """The requested operation is outside the supported regime."""


class InsufficientDataError(FraccountError, ValueError):
    """Not enough samples to compute the requested statistic."""


class NumericError(FraccountError, ArithmeticError):
    """Base class for failures of numerical evaluation."""


class DomainError(NumericError):
    """Argument outside the numerically supported evaluation domain."""


class ConvergenceError(NumericError):
    """A series or iteration failed to converge within its budget.

    ``last_term`` carries the magnitude of the last computed term.
    """

    def __init__(self, message, last_term=None):
        super().__init__(message)
        self.last_term = last_term


class PrecisionLossError(NumericError):
    """Cancellation ate more accuracy than the configuration allows."""


class AsymptoticError(NumericError):
    """An asymptotic series is invalid at the requested argument."""


class IntegrationError(NumericError):
    """Numerical quadrature could not certify the requested accuracy."""


class SamplingRangeError(NumericError):
    """Inverse-transform sampling fell outside the reachable range."""


class DegenerateDistributionError(NumericError):
    """The distribution is degenerate (zero variance) for this statistic."""
