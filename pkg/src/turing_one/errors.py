"""Exception types shared across the package."""


class TuringError(Exception):
    """Base class for all package errors."""


class DimensionError(TuringError, ValueError):
    """Matrix or polynomial has the wrong shape."""


class InvalidInputError(TuringError, ValueError):
    """Input is outside the domain of an operation (e.g. the zero polynomial)."""


class InvalidModelError(TuringError, ValueError):
    """A linear model cannot be analysed (too few species, non-finite entries)."""


class InvalidGainError(TuringError, ValueError):
    """Feedback gain is negative."""


class ModeRangeError(TuringError, IndexError):
    """Requested mode index exceeds the configured maximum."""


class PreconditionError(TuringError, ValueError):
    """An operation was called on an argument that violates its precondition."""


class DegenerateParametersError(TuringError, ValueError):
    """Gray-Scott parameters for which the equilibrium formulas break down."""


class ConfigurationError(TuringError, ValueError):
    """Simulation configuration is inconsistent."""


class DivergenceError(TuringError, RuntimeError):
    """Time integration blew up.

    Attributes
    ----------
    time : float
        Simulation time at which the failure was detected.
    """

    def __init__(self, time, message=None):
        self.time = float(time)
        super().__init__(message or f"solution diverged at t={self.time:.6g}")
