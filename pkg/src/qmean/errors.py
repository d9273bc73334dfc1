"""Exception types raised across the package."""


class QMeanError(Exception):
    """Base class for all package errors."""


class SizeError(QMeanError, ValueError):
    """Qubit count or register size outside the supported range."""


class LayoutError(QMeanError, ValueError):
    """Qubit positions that do not fit the state, circuit or register layout."""


class DistributionError(QMeanError, ValueError):
    """A probability vector that is negative or does not sum to one."""


class NormalizationError(QMeanError, ValueError):
    """A vector that should be unit norm (or nonzero) is not."""


class ParseError(QMeanError, ValueError):
    """A malformed experiment document."""
