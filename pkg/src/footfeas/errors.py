"""Exception types shared across the package."""


class FootfeasError(Exception):
    """Base class for all package errors."""


class SingularOrientation(FootfeasError):
    """Pitch too close to +/-90 deg; the Euler-rate mapping is not invertible."""


class OutOfRange(FootfeasError):
    """Curve parameter outside the [0, 1] interval."""


class OutOfBounds(FootfeasError):
    """Query or candidate grid outside the heightmap extent."""


class ParseError(FootfeasError):
    """Malformed config, heightmap or trajectory file."""


class InvalidGait(FootfeasError):
    """Non-positive phase durations or an unusable gait sequence."""


class DimensionMismatch(FootfeasError):
    """Inconsistent problem dimensions during assembly."""


class SolverError(FootfeasError):
    """Numerical breakdown inside an optimization backend."""
