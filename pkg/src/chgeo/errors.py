class ChgeoError(Exception):
    """Base class for all errors raised by this package."""


class GridError(ChgeoError, ValueError):
    pass


class BlowUpError(ChgeoError, FloatingPointError):
    """Eulerian integration produced non-finite values."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DiffeoError(ChgeoError, ValueError):
    """Samples no longer describe an orientation-preserving circle diffeomorphism."""

    def __init__(self, message, t=None, min_slope=None):
        super().__init__(message)
        self.t = t
        self.min_slope = min_slope


class PathError(ChgeoError, ValueError):
    """A path is malformed or its velocities disagree with its configurations."""


class PerturbationError(ChgeoError, ValueError):
    pass


class ConfigError(ChgeoError, ValueError):
    """Invalid scenario configuration. ``key`` names the offending field."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line
