"""Exception hierarchy shared across the package."""


class LogcaveError(Exception):
    """Base class for all package errors."""


class DegenerateData(LogcaveError):
    """Data points are affinely dependent; the MLE does not exist."""


class NoConvergence(LogcaveError):
    """Fit did not reach the requested tolerance within max_iter.

    Carries the best iterate so callers can inspect or keep it.
    """

    def __init__(self, message, tent=None):
        super().__init__(message)
        self.tent = tent


class NumericalBreakdown(LogcaveError):
    """A moment integral evaluated to a non-finite value."""


class SingularSmoothing(LogcaveError):
    """The smoothing covariance is numerically singular; quadrature
    evaluation is unavailable (use the Monte Carlo path instead)."""


class FitFailure(LogcaveError):
    """A bootstrap refit failed even after a retry."""

    def __init__(self, replicate, message):
        super().__init__(f"bootstrap replicate {replicate}: {message}")
        self.replicate = replicate


class ClassTooSmall(LogcaveError):
    """A class has too few (or affinely dependent) training points."""

    def __init__(self, label, message):
        super().__init__(f"class {label!r}: {message}")
        self.label = label


class DimensionUnsupported(LogcaveError):
    """Operation requires a specific dimension (grids need d = 2)."""


class NonFiniteFunctional(LogcaveError):
    """The functional returned a non-finite value on a sampled point."""


class MalformedInput(LogcaveError):
    """Input file could not be parsed."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
