"""Exception hierarchy shared by all modules."""


class TunnelctlError(Exception):
    """Base class for all package errors."""


class GridMismatchError(TunnelctlError, ValueError):
    """Two objects that must share a grid do not."""


class GridError(TunnelctlError, ValueError):
    """Invalid grid or geometry description."""


class UndefinedExpectationError(TunnelctlError, ZeroDivisionError):
    """Expectation value requested for a state of zero norm."""


class DegenerateGeometryError(TunnelctlError):
    """Potential has no interior minima (nuclei too close)."""


class EigenSolveError(TunnelctlError):
    """Diagonalization failed or produced large residuals."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class LocalizationError(TunnelctlError):
    """Localized states could not be constructed; the DC tilt is too weak."""


class DegeneratePairError(TunnelctlError):
    """Level splitting is zero or too small to define a tunneling time."""


class NumericBlowupError(TunnelctlError, FloatingPointError):
    """Non-finite amplitudes appeared during propagation."""

    def __init__(self, message, last_good_time, trace=None):
        super().__init__(message)
        self.last_good_time = last_good_time
        self.trace = trace


class ForbiddenTransitionError(TunnelctlError):
    """Dipole matrix element vanishes."""


class ScheduleError(TunnelctlError):
    """A pulse schedule cannot be built from the supplied levels."""


class PhaseContinuityError(TunnelctlError):
    """Electronic basis signs could not be aligned across R."""

    def __init__(self, message, r_values=()):
        super().__init__(message)
        self.r_values = list(r_values)


class CorruptFileError(TunnelctlError, OSError):
    """Snapshot or trace file is malformed."""

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class ConfigError(TunnelctlError, KeyError):
    """Configuration key is unknown or has an invalid value."""

    def __init__(self, key, reason):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason

    def __str__(self):
        return f"{self.key}: {self.reason}"
