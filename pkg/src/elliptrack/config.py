"""Parameter files: flat key=value text using the conventional symbol names.

Example::

    # detection bundle
    ContourOverlap = 0.95
    EllipseOverlap = 0.95
    mnAxSize = 5
    mxAxSize = 700
    maxAxisRatio = 5
    minContourSize = 50
"""

from __future__ import annotations

from .detector import DetectionThresholds
from .edges import CannyParams
from .errors import ConfigError
from .tracker import TrackerConfig

__all__ = ["parse_kv", "load_thresholds", "load_tracker_config"]

_THRESHOLD_KEYS = {
    "ContourOverlap": "contour_overlap",
    "EllipseOverlap": "ellipse_overlap",
    "mnAxSize": "min_axis_size",
    "mxAxSize": "max_axis_size",
    "maxAxisRatio": "max_axis_ratio",
    "minContourSize": "min_contour_size",
}

_INT_FIELDS = {"min_contour_size", "max_scale"}

_TRACKER_KEYS = {
    "TrackingContourOverlap": "tracking_contour_overlap",
    "TrackingEllipseOverlap": "tracking_ellipse_overlap",
    "CannyLow": "canny_low",
    "CannyHigh": "canny_high",
    "CannySigma": "canny_sigma",
    "maxScale": "max_scale",
    "minTargetSize": "min_target_size",
    "maxTargetSize": "max_target_size",
    "roiExpandFactor": "roi_expand_factor",
}


def parse_kv(text: str) -> dict[str, str]:
    """Parse 'key = value' lines; '#' starts a comment, blanks ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _convert(key: str, field: str, value: str):
    try:
        return int(value) if field in _INT_FIELDS else float(value)
    except ValueError:
        raise ConfigError(f"bad numeric value {value!r} for {key}") from None


def load_thresholds(path: str) -> DetectionThresholds:
    """Detection thresholds from a key=value file; absent keys keep defaults.

    Raises:
        ConfigError: unknown key, bad value, or invariant violation.
    """
    with open(path) as fh:
        pairs = parse_kv(fh.read())
    fields = {}
    for key, value in pairs.items():
        if key not in _THRESHOLD_KEYS:
            raise ConfigError(f"unknown threshold key {key!r}")
        field = _THRESHOLD_KEYS[key]
        fields[field] = _convert(key, field, value)
    try:
        return DetectionThresholds(**fields)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_tracker_config(path: str) -> tuple[TrackerConfig, CannyParams]:
    """Full tracker + edge-detector configuration from one key=value file.

    Accepts the six threshold keys (detection bundle; sizes shared with the
    tracking bundle), Tracking{Contour,Ellipse}Overlap, Canny{Low,High,Sigma},
    and maxScale / minTargetSize / maxTargetSize / roiExpandFactor.
    """
    with open(path) as fh:
        pairs = parse_kv(fh.read())
    det_fields = {}
    extras = {}
    for key, value in pairs.items():
        if key in _THRESHOLD_KEYS:
            field = _THRESHOLD_KEYS[key]
            det_fields[field] = _convert(key, field, value)
        elif key in _TRACKER_KEYS:
            field = _TRACKER_KEYS[key]
            extras[field] = _convert(key, field, value)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        detect = DetectionThresholds(**det_fields)
        track_overrides = {
            "contour_overlap": extras.pop("tracking_contour_overlap", 0.7),
            "ellipse_overlap": extras.pop("tracking_ellipse_overlap", 0.3),
        }
        track = DetectionThresholds(
            min_axis_size=detect.min_axis_size,
            max_axis_size=detect.max_axis_size,
            max_axis_ratio=detect.max_axis_ratio,
            min_contour_size=detect.min_contour_size,
            **track_overrides)
        canny = CannyParams(
            low_threshold=extras.pop("canny_low", 50.0),
            high_threshold=extras.pop("canny_high", 150.0),
            gaussian_sigma=extras.pop("canny_sigma", 1.4))
        cfg = TrackerConfig(detect_thresholds=detect, track_thresholds=track,
                            **extras)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg, canny
