"""Per-stream target tracking: threshold switching, ROI and scale ladder.

One ``track_step`` call consumes one frame.  While no target is locked, the
full frame is searched with strict thresholds; once locked, detection runs
inside an expanded ROI around the last position with relaxed thresholds.
Frames are downscaled by a power-of-two divisor that follows the target's
apparent size, and a miss triggers one retry at half the divisor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .detector import (DetectionThresholds, ScoredEllipse, detect_ellipses,
                       group_concentric)
from .edges import CannyParams
from .errors import EmptyRoi, ImageTooSmall, InvalidScale
from .geometry import Ellipse
from .image import Roi, clamp_roi, extract_roi, scale_image

__all__ = [
    "TrackerConfig",
    "TrackerState",
    "StepDetails",
    "determine_params",
    "detect_target",
    "detect_target_detailed",
    "select_target",
    "compensate_offset",
    "calculate_roi",
    "track_step",
    "track_step_annotated",
]


@dataclass(frozen=True)
class TrackerConfig:
    """Tracker parameter bundle: threshold pairs, scale caps, size bands."""

    detect_thresholds: DetectionThresholds = field(
        default_factory=DetectionThresholds.detection)
    track_thresholds: DetectionThresholds = field(
        default_factory=DetectionThresholds.tracking)
    max_scale: int = 100
    min_target_size: float = 50.0
    max_target_size: float = 160.0
    roi_expand_factor: float = 2.0
    # the miss-retry normally reuses the current mode's thresholds; this
    # switches it to the strict detection bundle instead
    retry_with_detection_thresholds: bool = False

    def __post_init__(self):
        if self.max_scale < 1:
            raise ValueError(f"max_scale must be >= 1, got {self.max_scale}")
        if self.roi_expand_factor < 1.0:
            raise ValueError(
                f"roi_expand_factor must be >= 1, got {self.roi_expand_factor}")
        if not (self.min_target_size < self.max_target_size):
            raise ValueError(
                f"need min_target_size < max_target_size, got "
                f"{self.min_target_size} vs {self.max_target_size}")


@dataclass(frozen=True)
class TrackerState:
    """Tracking status, scale divisor, current ROI and last seen target."""

    is_tracking: bool = False
    scale: int = 1
    roi: Roi | None = None
    last_target: Ellipse | None = None

    def __post_init__(self):
        if self.scale < 1 or (self.scale & (self.scale - 1)) != 0:
            raise ValueError(f"scale must be a power of two >= 1, got {self.scale}")
        if self.is_tracking != (self.roi is not None):
            raise ValueError("roi must be present exactly when tracking")


def determine_params(cfg: TrackerConfig, is_tracking: bool) -> DetectionThresholds:
    """Threshold bundle for the current mode: strict search vs relaxed re-lock."""
    return cfg.track_thresholds if is_tracking else cfg.detect_thresholds


def detect_target_detailed(img: np.ndarray, scale: int,
                           thresholds: DetectionThresholds,
                           canny: CannyParams = CannyParams(),
                           last_target: Ellipse | None = None
                           ) -> tuple[Ellipse | None, list[ScoredEllipse]]:
    """Like :func:`detect_target`, also returning every cascade survivor.

    Both the selected target and the returned detections are rescaled to
    input-image coordinates.
    """
    scaled = scale_image(img, scale)
    detections = detect_ellipses(scaled, thresholds.with_scale(scale), canny)
    groups = group_concentric(detections)
    last_scaled = last_target.scaled(1.0 / scale) if last_target is not None else None
    target = select_target(groups, last_scaled)
    rescaled = [replace(d, ellipse=d.ellipse.scaled(float(scale)))
                for d in detections]
    return (target.scaled(float(scale)) if target is not None else None), rescaled


def detect_target(img: np.ndarray, scale: int,
                  thresholds: DetectionThresholds,
                  canny: CannyParams = CannyParams(),
                  last_target: Ellipse | None = None) -> Ellipse | None:
    """Detect the target in one image at the given scale divisor.

    The image is downscaled, pixel-denominated thresholds shrink with it,
    and the selected target is rescaled back to input-image coordinates.
    ``last_target`` (input-image coordinates) only breaks selection ties.
    """
    target, _ = detect_target_detailed(img, scale, thresholds, canny, last_target)
    return target


def select_target(groups: list[list[ScoredEllipse]],
                  last_target: Ellipse | None = None) -> Ellipse | None:
    """Pick the tracked target out of concentric candidate groups.

    Concentric groups (size >= 2) beat singletons; among those the highest
    summed edge-support score wins, with ties broken by distance of the
    group's mean center to the last known target.  The winning group's
    largest member is the target (the outermost ring border).
    """
    if not groups:
        return None
    pool = [g for g in groups if len(g) >= 2] or groups

    def mean_center(group: list[ScoredEllipse]) -> tuple[float, float]:
        return (sum(s.ellipse.cx for s in group) / len(group),
                sum(s.ellipse.cy for s in group) / len(group))

    scores = [sum(s.ellipse_overlap_score for s in g) for g in pool]
    best_score = max(scores)
    tied = [g for g, s in zip(pool, scores) if s >= best_score - 1e-9]
    if len(tied) > 1 and last_target is not None:
        tied.sort(key=lambda g: math.hypot(mean_center(g)[0] - last_target.cx,
                                           mean_center(g)[1] - last_target.cy))
    winner = tied[0]
    return max(winner, key=lambda s: s.ellipse.area).ellipse


def compensate_offset(target: Ellipse, roi: Roi | None) -> Ellipse:
    """Translate ROI-relative coordinates back to the full frame."""
    if roi is None:
        return target
    return target.translated(float(roi.x), float(roi.y))


def calculate_roi(target: Ellipse, frame_width: int, frame_height: int,
                  cfg: TrackerConfig) -> Roi:
    """Expanded bounding box around the target, clamped to the frame."""
    hw, hh = target.bounding_half_extents()
    hw *= cfg.roi_expand_factor
    hh *= cfg.roi_expand_factor
    x0 = math.floor(target.cx - hw)
    y0 = math.floor(target.cy - hh)
    x1 = math.ceil(target.cx + hw)
    y1 = math.ceil(target.cy + hh)
    return clamp_roi(Roi(x0, y0, max(1, x1 - x0), max(1, y1 - y0)),
                     frame_width, frame_height)


@dataclass(frozen=True)
class StepDetails:
    """What one track_step actually did, for annotation overlays."""

    detections: list[ScoredEllipse]  # full-frame coordinates
    scale_used: int
    roi_used: Roi | None


def _attempt(img: np.ndarray, scale: int, thresholds: DetectionThresholds,
             canny: CannyParams, last_rel: Ellipse | None
             ) -> tuple[Ellipse | None, list[ScoredEllipse]]:
    """One detection attempt; an unworkably small region counts as a miss."""
    try:
        return detect_target_detailed(img, scale, thresholds, canny, last_rel)
    except (InvalidScale, ImageTooSmall):
        return None, []


def track_step_annotated(state: TrackerState, frame: np.ndarray,
                         cfg: TrackerConfig = TrackerConfig(),
                         canny: CannyParams = CannyParams()
                         ) -> tuple[Ellipse | None, TrackerState, StepDetails]:
    """:func:`track_step` plus the frame's cascade survivors and region."""
    h, w = frame.shape
    thresholds = determine_params(cfg, state.is_tracking)
    if state.is_tracking and state.roi is not None:
        try:
            region = extract_roi(frame, state.roi)
            origin = clamp_roi(state.roi, w, h)
        except EmptyRoi:
            # the stored roi misses this frame entirely (smaller frame, or a
            # target that slid off the edge last step): a plain miss
            next_scale = state.scale // 2 if state.scale > 1 else 1
            details = StepDetails(detections=[], scale_used=state.scale,
                                  roi_used=None)
            return None, TrackerState(is_tracking=False, scale=next_scale,
                                      roi=None,
                                      last_target=state.last_target), details
        last_rel = (state.last_target.translated(-float(origin.x), -float(origin.y))
                    if state.last_target is not None else None)
    else:
        region = frame
        origin = None
        last_rel = state.last_target

    scale = state.scale
    target, detections = _attempt(region, scale, thresholds, canny, last_rel)
    if target is None and scale > 1:
        scale //= 2
        retry_thresholds = (cfg.detect_thresholds
                            if cfg.retry_with_detection_thresholds else thresholds)
        target, detections = _attempt(region, scale, retry_thresholds, canny, last_rel)

    if origin is not None:
        detections = [replace(d, ellipse=compensate_offset(d.ellipse, origin))
                      for d in detections]
    details = StepDetails(detections=detections, scale_used=scale, roi_used=origin)

    if target is None:
        return None, TrackerState(is_tracking=False, scale=scale, roi=None,
                                  last_target=state.last_target), details

    # size-driven scale for the next frame, measured at processing resolution
    processed_major = target.major_axis / scale
    next_scale = scale
    if processed_major > cfg.max_target_size and scale * 2 <= cfg.max_scale:
        next_scale = scale * 2
    elif processed_major < cfg.min_target_size and scale > 1:
        next_scale = scale // 2

    full = compensate_offset(target, origin)
    try:
        roi = calculate_roi(full, w, h, cfg)
    except EmptyRoi:
        return None, TrackerState(is_tracking=False, scale=next_scale, roi=None,
                                  last_target=state.last_target), details
    return full, TrackerState(is_tracking=True, scale=next_scale, roi=roi,
                              last_target=full), details


def track_step(state: TrackerState, frame: np.ndarray,
               cfg: TrackerConfig = TrackerConfig(),
               canny: CannyParams = CannyParams()) -> tuple[Ellipse | None, TrackerState]:
    """Advance the tracker by one frame; returns (target, next state).

    The returned target is in full-frame coordinates.  A miss at scale > 1
    is retried once at half the scale on the same region; the halved scale
    sticks either way.  On success the next scale follows the target's
    apparent size and the ROI re-centers on it; on a miss the lock drops.
    """
    target, next_state, _ = track_step_annotated(state, frame, cfg, canny)
    return target, next_state
