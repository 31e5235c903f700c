"""Exception hierarchy shared across the package.

Every error raised by gphcrb derives from :class:`GphcrbError` so callers
(and the CLI exit-code mapping) can distinguish our failures from bugs.
"""


class GphcrbError(Exception):
    """Base class for all gphcrb errors."""


class ConfigError(GphcrbError):
    """Invalid configuration, schema violation, or malformed model JSON."""


class NumericalError(GphcrbError):
    """Base class for numerical failures."""


class NotPositiveDefinite(NumericalError):
    """Matrix could not be factorized even after the jitter ladder."""


class DimensionMismatch(NumericalError):
    """Operands have incompatible shapes."""


class InvalidBeta(ConfigError):
    """Covariance parameters violate their positivity constraints."""


class InvalidTheta(ConfigError):
    """Hyperparameter vector violates its constraints."""


class NotLinearInParameters(GphcrbError):
    """Mean function has no basis representation m(x) = alpha . u(x)."""


class UnsupportedDimension(GphcrbError):
    """Built-in mean functions only accept one-dimensional inputs."""


class NoMeanParameters(GphcrbError):
    """The hybrid bound needs at least one mean parameter."""


class SingularM(NumericalError):
    """Mean-parameter information matrix is numerically singular."""


class AllStartsFailed(NumericalError):
    """Every optimizer start diverged or hit a factorization failure."""


class DataError(GphcrbError):
    """Base class for dataset ingestion failures."""


class MalformedRow(DataError):
    """A data row could not be parsed; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateMonth(DataError):
    """The same (year, month) appears twice in the input."""


class DataGap(DataError):
    """A requested month range is not fully covered by the records."""
