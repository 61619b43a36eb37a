"""Tracking state-machine tests over synthetic ring frames."""

import math

import numpy as np
import pytest

from elliptrack.detector import DetectionThresholds, ScoredEllipse
from elliptrack.geometry import Ellipse
from elliptrack.image import Roi, extract_roi
from elliptrack.tracker import (
    TrackerConfig,
    TrackerState,
    calculate_roi,
    compensate_offset,
    detect_target,
    determine_params,
    select_target,
    track_step,
    track_step_annotated,
)

from conftest import ring_frame


def _scored(cx, cy, a, b, eo=1.0):
    return ScoredEllipse(Ellipse(cx, cy, a, b, 0.0), 1.0, eo, 0)


def test_determine_params_switches_bundles():
    cfg = TrackerConfig()
    detect = determine_params(cfg, False)
    assert (detect.contour_overlap, detect.ellipse_overlap) == (0.95, 0.95)
    track = determine_params(cfg, True)
    assert (track.contour_overlap, track.ellipse_overlap) == (0.7, 0.3)
    assert determine_params(cfg, True) == track


def test_config_validates():
    with pytest.raises(ValueError):
        TrackerConfig(max_scale=0)
    with pytest.raises(ValueError):
        TrackerConfig(roi_expand_factor=0.5)
    with pytest.raises(ValueError):
        TrackerConfig(min_target_size=200.0, max_target_size=100.0)


def test_state_validates():
    with pytest.raises(ValueError):
        TrackerState(scale=3)
    with pytest.raises(ValueError):
        TrackerState(scale=0)
    with pytest.raises(ValueError):
        TrackerState(is_tracking=True, roi=None)
    with pytest.raises(ValueError):
        TrackerState(is_tracking=False, roi=Roi(0, 0, 10, 10))


def test_detect_target_full_scale():
    truth = Ellipse(320.0, 180.0, 80.0, 50.0, 0.4)
    frame = ring_frame(640, 360, truth, stroke=8)
    t = detect_target(frame, 1, DetectionThresholds.detection())
    assert t is not None
    assert math.hypot(t.cx - truth.cx, t.cy - truth.cy) <= 2.0


def test_detect_target_half_scale_rescales_back():
    truth = Ellipse(320.0, 180.0, 80.0, 50.0, 0.4)
    frame = ring_frame(640, 360, truth, stroke=8)
    t = detect_target(frame, 2, DetectionThresholds.detection())
    assert t is not None
    assert math.hypot(t.cx - truth.cx, t.cy - truth.cy) <= 4.0
    assert abs(t.a - truth.a) <= 8.0


def test_detect_target_blank_is_absent():
    blank = np.full((360, 640), 200, dtype=np.uint8)
    for scale in (1, 2, 4):
        assert detect_target(blank, scale, DetectionThresholds.tracking()) is None


def test_select_target_prefers_concentric_pair():
    pair = [_scored(100.0, 100.0, 40.0, 30.0), _scored(100.5, 100.0, 34.0, 25.0)]
    lone = [_scored(300.0, 50.0, 60.0, 45.0)]
    got = select_target([pair, lone])
    assert got is pair[0].ellipse  # outermost member of the pair


def test_select_target_empty_is_absent():
    assert select_target([]) is None


def test_select_target_tie_breaks_toward_last_target():
    pair_a = [_scored(100.0, 100.0, 40.0, 30.0), _scored(100.0, 101.0, 30.0, 22.0)]
    pair_b = [_scored(400.0, 200.0, 40.0, 30.0), _scored(400.0, 201.0, 30.0, 22.0)]
    near_b = Ellipse(390.0, 195.0, 40.0, 30.0, 0.0)
    got = select_target([pair_a, pair_b], near_b)
    assert got is pair_b[0].ellipse
    near_a = Ellipse(110.0, 105.0, 40.0, 30.0, 0.0)
    assert select_target([pair_a, pair_b], near_a) is pair_a[0].ellipse


def test_select_target_without_pairs_uses_singletons():
    lone = [_scored(300.0, 50.0, 60.0, 45.0)]
    assert select_target([lone]) is lone[0].ellipse


def test_compensate_offset_translates_center_only():
    t = Ellipse(10.0, 20.0, 30.0, 15.0, 0.8)
    out = compensate_offset(t, Roi(100, 50, 64, 64))
    assert (out.cx, out.cy) == (110.0, 70.0)
    assert (out.a, out.b, out.theta) == (t.a, t.b, t.theta)
    assert compensate_offset(t, None) is t


def test_compensate_composes_with_roi_detection():
    truth = Ellipse(320.0, 180.0, 80.0, 50.0, 0.4)
    frame = ring_frame(640, 360, truth, stroke=8)
    full = detect_target(frame, 1, DetectionThresholds.detection())
    roi = Roi(150, 40, 340, 280)
    sub = extract_roi(frame, roi)
    local = detect_target(sub, 1, DetectionThresholds.tracking())
    assert full is not None and local is not None
    back = compensate_offset(local, roi)
    assert math.hypot(back.cx - full.cx, back.cy - full.cy) <= 2.0


def test_calculate_roi_doubles_the_bbox():
    cfg = TrackerConfig()
    roi = calculate_roi(Ellipse(320.0, 180.0, 50.0, 50.0, 0.0), 640, 360, cfg)
    assert (roi.x, roi.y, roi.width, roi.height) == (220, 80, 200, 200)


def test_calculate_roi_clamps_at_corners():
    cfg = TrackerConfig()
    target = Ellipse(15.0, 12.0, 40.0, 30.0, 0.0)
    roi = calculate_roi(target, 640, 360, cfg)
    assert (roi.x, roi.y) == (0, 0)
    # still covers the bbox intersected with the frame
    assert roi.x <= 0 and roi.y <= 0
    assert roi.x + roi.width >= 15 + 40 and roi.y + roi.height >= 12 + 30


def test_calculate_roi_factor_one_is_the_bbox():
    cfg = TrackerConfig(roi_expand_factor=1.0)
    roi = calculate_roi(Ellipse(320.0, 180.0, 50.0, 50.0, 0.0), 640, 360, cfg)
    assert (roi.x, roi.y, roi.width, roi.height) == (270, 130, 100, 100)


def test_track_step_acquires_and_locks():
    truth = Ellipse(320.0, 180.0, 80.0, 50.0, 0.4)
    frame = ring_frame(640, 360, truth, stroke=8)
    target, state = track_step(TrackerState(), frame)
    assert target is not None
    assert math.hypot(target.cx - truth.cx, target.cy - truth.cy) <= 2.0
    assert state.is_tracking and state.roi is not None
    assert state.scale == 1  # major axis 160 does not exceed max_target_size
    assert state.last_target is target


def test_track_step_blank_at_scale_four_retries_then_unlocks():
    blank = np.full((360, 640), 200, dtype=np.uint8)
    state = TrackerState(is_tracking=True, scale=4, roi=Roi(100, 50, 240, 200),
                         last_target=Ellipse(220.0, 150.0, 60.0, 40.0, 0.0))
    target, nxt = track_step(state, blank)
    assert target is None
    assert not nxt.is_tracking and nxt.roi is None
    assert nxt.scale == 2  # the halved retry scale sticks


def test_track_step_oversize_target_doubles_scale():
    truth = Ellipse(320.0, 180.0, 90.0, 70.0, 0.2)  # major axis 180 > 160
    frame = ring_frame(640, 360, truth, stroke=8)
    target, state = track_step(TrackerState(), frame)
    assert target is not None
    assert state.scale == 2


def test_track_step_roi_detection_matches_full_frame():
    truth = Ellipse(320.0, 180.0, 80.0, 50.0, 0.4)
    frame = ring_frame(640, 360, truth, stroke=8)
    full_target, _ = track_step(TrackerState(), frame)
    locked = TrackerState(is_tracking=True, scale=1, roi=Roi(140, 30, 380, 300),
                          last_target=full_target)
    roi_target, state, details = track_step_annotated(locked, frame)
    assert roi_target is not None
    assert math.hypot(roi_target.cx - full_target.cx,
                      roi_target.cy - full_target.cy) <= 2.0
    assert details.roi_used is not None and details.scale_used == 1
    # annotated detections already sit in full-frame coordinates
    assert any(math.hypot(d.ellipse.cx - truth.cx, d.ellipse.cy - truth.cy) <= 3.0
               for d in details.detections)


def test_growing_target_ratchets_scale_upward():
    cfg = TrackerConfig()
    state = TrackerState()
    scales = []
    for a in (60.0, 85.0, 95.0, 105.0, 115.0):
        truth = Ellipse(320.0, 180.0, a, 0.75 * a, 0.3)
        frame = ring_frame(640, 360, truth, stroke=8)
        target, state = track_step(state, frame, cfg)
        assert target is not None
        scales.append(state.scale)
    assert scales == sorted(scales)
    assert scales[-1] >= 2


def test_lose_and_reacquire_restores_lock_shape():
    truth = Ellipse(320.0, 180.0, 80.0, 50.0, 0.4)
    frame = ring_frame(640, 360, truth, stroke=8)
    blank = np.full((360, 640), 200, dtype=np.uint8)
    _, first = track_step(TrackerState(), frame)
    _, lost = track_step(first, blank)
    assert not lost.is_tracking and lost.roi is None
    _, again = track_step(lost, frame)
    assert again.is_tracking == first.is_tracking
    assert again.roi == first.roi
    assert again.scale == first.scale


def test_track_step_survives_disjoint_stale_roi():
    # a roi beyond the frame (content shrank, or the target slid off the
    # edge) is a plain miss, not an error
    blank = np.full((48, 64), 190, dtype=np.uint8)
    state = TrackerState(is_tracking=True, scale=2, roi=Roi(100, 80, 40, 30),
                         last_target=Ellipse(120.0, 95.0, 20.0, 15.0, 0.0))
    target, nxt = track_step(state, blank)
    assert target is None
    assert not nxt.is_tracking and nxt.roi is None
    assert nxt.scale == 1


def test_track_step_survives_unscalable_roi():
    # a roi smaller than the scale divisor cannot be downscaled; both the
    # attempt and its retry count as misses instead of raising
    blank = np.full((360, 640), 200, dtype=np.uint8)
    state = TrackerState(is_tracking=True, scale=4, roi=Roi(0, 0, 3, 3),
                         last_target=Ellipse(1.0, 1.0, 30.0, 20.0, 0.0))
    target, nxt = track_step(state, blank)
    assert target is None
    assert not nxt.is_tracking
    assert nxt.scale == 2
