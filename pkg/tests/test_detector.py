"""Detection cascade tests: overlap scores, per-gate behavior, grouping."""

import math

import numpy as np
import pytest

from elliptrack.contours import Contour, extract_contours
from elliptrack.detector import (
    DetectionThresholds,
    ScoredEllipse,
    _cascade,
    contour_overlap,
    detect_ellipses,
    ellipse_overlap,
    group_concentric,
)
from elliptrack.errors import ImageTooSmall
from elliptrack.geometry import Ellipse
from elliptrack.image import rasterize_ellipse_perimeter

from conftest import ring_frame


def _scored(cx, cy, a=20.0, b=15.0):
    return ScoredEllipse(Ellipse(cx, cy, a, b, 0.0), 1.0, 1.0, 0)


def _raster_mask(e, w, h):
    pts = rasterize_ellipse_perimeter(e, w, h)
    mask = np.zeros((h, w), dtype=np.uint8)
    mask[pts[:, 1], pts[:, 0]] = 1
    return pts, mask


def test_thresholds_default_bundles():
    det = DetectionThresholds.detection()
    assert (det.contour_overlap, det.ellipse_overlap) == (0.95, 0.95)
    assert (det.min_axis_size, det.max_axis_size) == (5.0, 700.0)
    assert (det.max_axis_ratio, det.min_contour_size) == (5.0, 50)
    trk = DetectionThresholds.tracking()
    assert (trk.contour_overlap, trk.ellipse_overlap) == (0.7, 0.3)
    assert trk.min_contour_size == det.min_contour_size


def test_thresholds_validate():
    with pytest.raises(ValueError):
        DetectionThresholds(contour_overlap=1.5)
    with pytest.raises(ValueError):
        DetectionThresholds(min_axis_size=10.0, max_axis_size=5.0)
    with pytest.raises(ValueError):
        DetectionThresholds(max_axis_ratio=0.5)


def test_with_scale_divides_pixel_gates_only():
    th = DetectionThresholds()
    assert th.with_scale(1) is th
    s2 = th.with_scale(2)
    assert s2.min_axis_size == 2.5
    assert s2.min_contour_size == 25
    assert s2.max_axis_size == 700.0
    assert s2.contour_overlap == th.contour_overlap
    assert DetectionThresholds(min_contour_size=3).with_scale(8).min_contour_size == 1


def test_contour_overlap_of_own_perimeter():
    e = Ellipse(60.0, 60.0, 30.0, 18.0, 0.7)
    pts, _ = _raster_mask(e, 120, 120)
    c = Contour(points=pts, is_closed=True)
    assert contour_overlap(c, e, 120, 120) >= 0.99


def test_contour_overlap_halves_with_distant_segment():
    e = Ellipse(60.0, 60.0, 25.0, 25.0, 0.0)
    pts, _ = _raster_mask(e, 300, 120)
    n = pts.shape[0]
    seg = np.column_stack((np.arange(200, 200 + n, dtype=np.int32),
                           np.full(n, 10, dtype=np.int32)))
    c = Contour(points=np.concatenate([pts, seg]), is_closed=False)
    assert abs(contour_overlap(c, e, 300, 120) - 0.5) <= 0.02


def test_contour_overlap_disjoint_is_zero():
    e = Ellipse(60.0, 60.0, 20.0, 20.0, 0.0)
    seg = np.column_stack((np.arange(200, 260, dtype=np.int32),
                           np.full(60, 10, dtype=np.int32)))
    c = Contour(points=seg, is_closed=False)
    assert contour_overlap(c, e, 300, 120) == 0.0


def test_ellipse_overlap_on_own_raster():
    e = Ellipse(60.0, 60.0, 30.0, 20.0, 0.4)
    _, mask = _raster_mask(e, 120, 120)
    assert ellipse_overlap(e, mask) == 1.0


def test_ellipse_overlap_half_arc():
    e = Ellipse(60.0, 60.0, 30.0, 30.0, 0.0)
    pts, _ = _raster_mask(e, 120, 120)
    ang = np.arctan2(pts[:, 1] - 60.0, pts[:, 0] - 60.0)
    half = pts[(ang >= 0.0) & (ang < math.pi)]
    edges = np.zeros((120, 120), dtype=np.uint8)
    edges[half[:, 1], half[:, 0]] = 1
    assert abs(ellipse_overlap(e, edges) - 0.5) <= 0.03


def test_ellipse_overlap_blank_edges():
    e = Ellipse(60.0, 60.0, 30.0, 20.0, 0.0)
    assert ellipse_overlap(e, np.zeros((120, 120), dtype=np.uint8)) == 0.0


def test_blank_frame_detects_nothing():
    frame = np.full((100, 100), 200, dtype=np.uint8)
    assert detect_ellipses(frame) == []


def test_tiny_frame_rejected():
    with pytest.raises(ImageTooSmall):
        detect_ellipses(np.zeros((2, 2), dtype=np.uint8))


def test_ring_frame_yields_concentric_detections():
    truth = Ellipse(320.0, 180.0, 80.0, 50.0, 0.4)
    frame = ring_frame(640, 360, truth, stroke=8)
    dets = detect_ellipses(frame, DetectionThresholds.detection())
    assert len(dets) >= 2
    cs = np.array([[d.ellipse.cx, d.ellipse.cy] for d in dets])
    spread = np.hypot(cs[:, 0:1] - cs[None, :, 0], cs[:, 1:2] - cs[None, :, 1])
    assert spread.max() <= 3.0
    assert np.all(np.hypot(cs[:, 0] - 320.0, cs[:, 1] - 180.0) <= 2.0)


def test_partially_visible_ring_found_with_tracking_thresholds():
    # about 40% of the ring is left of the frame edge
    truth = Ellipse(25.0, 180.0, 80.0, 50.0, 0.0)
    frame = ring_frame(640, 360, truth, stroke=8)
    dets = detect_ellipses(frame, DetectionThresholds.tracking())
    assert dets
    best = min(dets, key=lambda d: math.hypot(d.ellipse.cx - 25.0, d.ellipse.cy - 180.0))
    assert math.hypot(best.ellipse.cx - 25.0, best.ellipse.cy - 180.0) <= 5.0


def test_detections_satisfy_every_gate():
    truth = Ellipse(320.0, 180.0, 80.0, 50.0, 0.4)
    frame = ring_frame(640, 360, truth, stroke=8)
    th = DetectionThresholds.detection()
    dets = detect_ellipses(frame, th)
    assert dets
    assert [d.source_contour_index for d in dets] == sorted(
        d.source_contour_index for d in dets)
    for d in dets:
        assert d.contour_overlap_score >= th.contour_overlap
        assert d.ellipse_overlap_score >= th.ellipse_overlap
        assert 2.0 * d.ellipse.a <= th.max_axis_size
        assert 2.0 * d.ellipse.b >= th.min_axis_size
        assert d.ellipse.a / d.ellipse.b <= th.max_axis_ratio


def test_raising_thresholds_never_adds_detections():
    truth = Ellipse(320.0, 180.0, 80.0, 50.0, 0.4)
    frame = ring_frame(640, 360, truth, stroke=8)
    pairs = [(0.3, 0.3), (0.7, 0.3), (0.7, 0.7), (0.95, 0.95), (0.99, 0.99)]
    prev = None
    for co, eo in pairs:
        got = {d.source_contour_index
               for d in detect_ellipses(frame, DetectionThresholds(co, eo))}
        if prev is not None:
            assert got <= prev
        prev = got


def test_half_contrast_gives_same_count():
    truth = Ellipse(320.0, 180.0, 80.0, 50.0, 0.4)
    frame = ring_frame(640, 360, truth, stroke=8)
    dimmed = (frame // 2).astype(np.uint8)
    th = DetectionThresholds.detection()
    assert len(detect_ellipses(frame, th)) == len(detect_ellipses(dimmed, th))


def test_detection_is_deterministic():
    truth = Ellipse(300.0, 200.0, 60.0, 45.0, 1.0)
    frame = ring_frame(640, 360, truth, stroke=6)
    assert detect_ellipses(frame) == detect_ellipses(frame)


def test_size_gate():
    e = Ellipse(60.0, 60.0, 30.0, 30.0, 0.0)
    pts, _ = _raster_mask(e, 120, 120)
    ang = np.arctan2(pts[:, 1] - 60.0, pts[:, 0] - 60.0)
    half = pts[(ang >= 0.0) & (ang < math.pi)]
    edges = np.zeros((120, 120), dtype=np.uint8)
    edges[half[:, 1], half[:, 0]] = 1
    contours = extract_contours(edges)
    n = max(c.unique_points().shape[0] for c in contours)
    loose = DetectionThresholds(0.5, 0.3, min_contour_size=n)
    tight = DetectionThresholds(0.5, 0.3, min_contour_size=n + 1)
    assert len(_cascade(edges, contours, loose)) == 1
    assert _cascade(edges, contours, tight) == []


def test_max_axis_gate():
    e = Ellipse(60.0, 60.0, 30.0, 30.0, 0.0)
    _, edges = _raster_mask(e, 120, 120)
    contours = extract_contours(edges)
    wide = DetectionThresholds(0.5, 0.3, min_contour_size=20, max_axis_size=700.0)
    narrow = DetectionThresholds(0.5, 0.3, min_contour_size=20, max_axis_size=50.0)
    assert len(_cascade(edges, contours, wide)) >= 1
    assert _cascade(edges, contours, narrow) == []


def test_min_axis_gate():
    e = Ellipse(60.0, 60.0, 4.0, 4.0, 0.0)
    _, edges = _raster_mask(e, 120, 120)
    contours = extract_contours(edges)
    loose = DetectionThresholds(0.5, 0.3, min_contour_size=5, min_axis_size=5.0)
    tight = DetectionThresholds(0.5, 0.3, min_contour_size=5, min_axis_size=10.0)
    assert len(_cascade(edges, contours, loose)) >= 1
    assert _cascade(edges, contours, tight) == []


def test_axis_ratio_gate():
    e = Ellipse(150.0, 60.0, 60.0, 10.0, 0.0)
    _, edges = _raster_mask(e, 300, 120)
    contours = extract_contours(edges)
    loose = DetectionThresholds(0.5, 0.3, min_contour_size=20, max_axis_ratio=8.0)
    tight = DetectionThresholds(0.5, 0.3, min_contour_size=20, max_axis_ratio=5.0)
    assert len(_cascade(edges, contours, loose)) >= 1
    assert _cascade(edges, contours, tight) == []


def test_contour_overlap_gate():
    # a circle with a straight tail merges into one contour whose fit strays
    # from the contour pixels; the clean inner border passes either way
    e = Ellipse(60.0, 60.0, 30.0, 30.0, 0.0)
    pts, q = _raster_mask(e, 120, 120)
    q[60, 90:115] = 1
    contours = extract_contours(q)
    assert len(contours) == 2
    loose = DetectionThresholds(0.3, 0.3, min_contour_size=20)
    tight = DetectionThresholds(0.9, 0.3, min_contour_size=20)
    lo = _cascade(q, contours, loose)
    hi = _cascade(q, contours, tight)
    assert len(lo) == 2 and len(hi) == 1
    dropped = ({d.source_contour_index for d in lo}
               - {d.source_contour_index for d in hi})
    assert dropped == {0}  # the tailed outer contour


def test_ellipse_overlap_gate():
    e = Ellipse(60.0, 60.0, 30.0, 30.0, 0.0)
    pts, _ = _raster_mask(e, 120, 120)
    ang = np.arctan2(pts[:, 1] - 60.0, pts[:, 0] - 60.0)
    half = pts[(ang >= 0.0) & (ang < math.pi)]
    edges = np.zeros((120, 120), dtype=np.uint8)
    edges[half[:, 1], half[:, 0]] = 1
    contours = extract_contours(edges)
    loose = DetectionThresholds(0.5, 0.3, min_contour_size=20)
    tight = DetectionThresholds(0.5, 0.7, min_contour_size=20)
    lo = _cascade(edges, contours, loose)
    assert len(lo) == 1
    assert 0.45 <= lo[0].ellipse_overlap_score <= 0.6
    assert lo[0].contour_overlap_score >= 0.95
    assert _cascade(edges, contours, tight) == []


def test_concentric_pair_groups_together():
    groups = group_concentric([_scored(100.0, 100.0), _scored(100.5, 100.5)], 5.0)
    assert len(groups) == 1 and len(groups[0]) == 2


def test_concentric_filter_drops_lone_singleton():
    groups = group_concentric(
        [_scored(100.0, 100.0), _scored(101.0, 100.0), _scored(300.0, 50.0)], 5.0)
    assert len(groups) == 1
    assert len(groups[0]) == 2
    assert {(d.ellipse.cx, d.ellipse.cy) for d in groups[0]} == {
        (100.0, 100.0), (101.0, 100.0)}


def test_all_singletons_survive_without_concentric_evidence():
    dets = [_scored(50.0, 50.0), _scored(200.0, 60.0), _scored(90.0, 300.0)]
    groups = group_concentric(dets, 5.0)
    assert [len(g) for g in groups] == [1, 1, 1]
    assert group_concentric([], 5.0) == []
