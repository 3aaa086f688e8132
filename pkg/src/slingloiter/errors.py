"""Exception and warning types raised across the package."""


class SlingLoiterError(Exception):
    """Base class for all package errors."""


class CoincidentAnchors(SlingLoiterError, ValueError):
    pass


class TooFewCables(SlingLoiterError, ValueError):
    pass


class DimensionMismatch(SlingLoiterError, ValueError):
    pass


class DegenerateGeometry(SlingLoiterError):
    """Anchor layout cannot support the requested analysis (e.g. collinear anchors)."""


class DegenerateGeometryWarning(UserWarning):
    pass


class SlackCable(SlingLoiterError):
    """A cable force fell to (or below) the tension threshold.

    ``cable`` is the zero-based cable index and ``time`` the offending sample
    time when known.
    """

    def __init__(self, message, cable=None, time=None):
        super().__init__(message)
        self.cable = cable
        self.time = time


class Diverged(SlingLoiterError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ConfigError(SlingLoiterError, ValueError):
    pass
