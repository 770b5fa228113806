"""Exception hierarchy shared across the package."""


class SoftguideError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(SoftguideError):
    """Scenario configuration could not be parsed or validated."""


class StepTooCoarseError(SoftguideError):
    """Arc-length grid too coarse for the requested curvature."""


class OutsideStripError(SoftguideError):
    """Transverse coordinate outside the tubular neighbourhood."""


class WindowEdgeError(SoftguideError):
    """Nearest curve point is the first/last sample; window too short."""


class TruncationError(SoftguideError):
    """Longitudinal truncation window too small for the requested kernel."""


class NoBoundStateError(SoftguideError):
    """Discretized transverse operator produced no negative eigenvalue."""


class ToleranceError(SoftguideError):
    """A numerical tolerance could not be met at the configured resolution."""


class ConvergenceError(SoftguideError):
    """An iterative solver stopped before reaching its residual target."""
