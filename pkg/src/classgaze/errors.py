"""Exception types shared across the package."""


class ClassGazeError(Exception):
    """Base class for package errors."""


class EmptyDistributionError(ClassGazeError):
    """An operation that needs at least one gaze point got none."""


class InsufficientPointsError(ClassGazeError):
    """A distribution is too small for the requested computation."""


class DegenerateCurveError(ClassGazeError):
    """A k-distance curve is constant (or too short) and has no elbow."""


class DegenerateNullError(ClassGazeError):
    """The null distribution has zero spread; a z-score is undefined."""


class ConfigError(ClassGazeError):
    """Malformed configuration (file, environment, or request payload)."""


class SessionAuthError(ClassGazeError):
    """Unknown session, invalid student token, or bad instructor key."""


class SessionClosedError(ClassGazeError):
    """The session is closed and rejects new joins or data."""
