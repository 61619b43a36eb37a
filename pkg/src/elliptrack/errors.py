"""Exception types raised across the toolkit."""


class ElliptrackError(Exception):
    """Base class for all toolkit errors."""


class InvalidScale(ElliptrackError):
    """Scale divisor is invalid for the given image."""


class EmptyRoi(ElliptrackError):
    """ROI does not intersect the frame."""


class ImageTooSmall(ElliptrackError):
    """Image is below the minimum size for the operation."""


class TooFewPoints(ElliptrackError):
    """Not enough points to fit an ellipse (need at least 5)."""


class DegenerateFit(ElliptrackError):
    """Point scatter admits no valid ellipse (e.g. collinear points)."""


class NotAnEllipse(ElliptrackError):
    """Conic is not an ellipse (discriminant not negative)."""


class InvalidSpec(ElliptrackError):
    """Scene specification is inconsistent."""


class DatasetFormatError(ElliptrackError):
    """Dataset directory or annotation file cannot be interpreted."""


class EmptyInput(ElliptrackError):
    """Operation requires a non-empty input."""


class ConfigError(ElliptrackError):
    """Configuration file is malformed or contains unknown keys."""
