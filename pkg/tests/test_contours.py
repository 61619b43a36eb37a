"""Border-following tests over synthetic binary maps."""

import math

import numpy as np
from scipy import ndimage

from elliptrack.contours import extract_contours
from elliptrack.geometry import Ellipse
from elliptrack.image import dilate, rasterize_ellipse_perimeter


def test_blank_map_yields_no_contours():
    assert extract_contours(np.zeros((20, 20), dtype=np.uint8)) == []


def test_small_block_yields_single_border_ring():
    mask = np.zeros((9, 9), dtype=np.uint8)
    mask[3:6, 3:6] = 1
    contours = extract_contours(mask)
    assert len(contours) == 1
    c = contours[0]
    assert c.is_closed
    got = set(map(tuple, c.unique_points().tolist()))
    want = {(x, y) for x in range(3, 6) for y in range(3, 6)} - {(4, 4)}
    assert got == want


def test_two_blobs_give_two_disjoint_contours():
    mask = np.zeros((30, 40), dtype=np.uint8)
    mask[4:8, 5:9] = 1
    ys, xs = np.mgrid[0:30, 0:40]
    mask[np.hypot(xs - 28, ys - 18) <= 6.0] = 1
    _, n_components = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    contours = extract_contours(mask)
    assert len(contours) == n_components == 2
    sets = [set(map(tuple, c.unique_points().tolist())) for c in contours]
    assert not (sets[0] & sets[1])


def test_chains_step_eight_connected_without_stalls():
    rng = np.random.default_rng(21)
    mask = (rng.random((25, 35)) < 0.4).astype(np.uint8)
    for c in extract_contours(mask):
        pts = c.points
        steps = np.abs(np.diff(pts.astype(np.int64), axis=0))
        assert steps.max(initial=1) == 1  # 8-connected
        assert np.all(steps.max(axis=1) >= 1)  # no consecutive duplicates


def test_contour_union_stays_on_true_pixels():
    rng = np.random.default_rng(22)
    mask = (rng.random((30, 30)) < 0.35).astype(np.uint8)
    for c in extract_contours(mask):
        assert mask[c.points[:, 1], c.points[:, 0]].all()


def test_short_chains_are_dropped():
    mask = np.zeros((10, 10), dtype=np.uint8)
    mask[2, 2] = 1  # single pixel: 1-point chain
    mask[5, 5:7] = 1  # domino: 2-point chain
    assert extract_contours(mask) == []


def test_ring_contour_length_matches_perimeter_estimate():
    a, b = 60.0, 40.0
    e = Ellipse(100.0, 100.0, a, b, 0.5)
    pts = rasterize_ellipse_perimeter(e, 200, 200)
    band = np.zeros((200, 200), dtype=np.uint8)
    band[pts[:, 1], pts[:, 0]] = 1
    contours = extract_contours(dilate(band))
    ideal = math.pi * (3.0 * (a + b) - math.sqrt((3.0 * a + b) * (a + 3.0 * b)))
    assert max(len(c.unique_points()) for c in contours) >= 0.9 * ideal
