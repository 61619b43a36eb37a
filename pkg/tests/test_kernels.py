"""Kernel backends: numpy reference vs compiled core, plus independent oracles."""

import numpy as np
import pytest
from scipy import ndimage

from elliptrack._kernels import backend_name, fallback
from elliptrack.edges import gaussian_taps

try:
    from elliptrack._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled core not built")


def random_images(seed, n=8, lo=6, hi=40):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        h = int(rng.integers(lo, hi))
        w = int(rng.integers(lo, hi))
        yield rng.integers(0, 256, (h, w)).astype(np.uint8), rng


def test_backend_is_reported():
    assert backend_name in ("compiled", "fallback")


@needs_core
def test_smooth_parity():
    taps = gaussian_taps(1.4)
    for img, _ in random_images(0):
        a = fallback.gaussian_smooth(img, taps)
        b = _core.gaussian_smooth(img, taps)
        assert np.array_equal(a, b)


@needs_core
def test_sobel_parity():
    for img, _ in random_images(1):
        smooth = fallback.gaussian_smooth(img, gaussian_taps(1.0))
        for a, b in zip(fallback.sobel_gradients(smooth),
                        _core.sobel_gradients(smooth)):
            assert np.array_equal(a, b)


@needs_core
def test_nonmax_parity():
    for img, _ in random_images(2):
        smooth = fallback.gaussian_smooth(img, gaussian_taps(1.4))
        gx, gy, mag = fallback.sobel_gradients(smooth)
        assert np.array_equal(fallback.nonmax_suppress(mag, gx, gy),
                              _core.nonmax_suppress(mag, gx, gy))


@needs_core
def test_hysteresis_parity():
    for img, rng in random_images(3):
        thin = rng.random(img.shape) * 200.0
        thin[thin < 60.0] = 0.0
        assert np.array_equal(fallback.hysteresis(thin, 50.0, 150.0),
                              _core.hysteresis(thin, 50.0, 150.0))


@needs_core
def test_dilate_parity():
    for img, rng in random_images(4):
        mask = (rng.random(img.shape) < 0.15).astype(np.uint8)
        assert np.array_equal(fallback.dilate3(mask), _core.dilate3(mask))


@needs_core
def test_trace_parity():
    for img, rng in random_images(5):
        mask = (rng.random(img.shape) < 0.3).astype(np.uint8)
        a = fallback.trace_borders(mask)
        b = _core.trace_borders(mask)
        assert len(a) == len(b)
        for ca, cb in zip(a, b):
            assert np.array_equal(ca, cb)


def test_smooth_matches_scipy():
    taps = gaussian_taps(2.0)
    for img, _ in random_images(6, n=4):
        ours = fallback.gaussian_smooth(img, taps)
        ref = ndimage.correlate1d(img.astype(np.float64), taps, axis=1,
                                  mode="reflect")
        ref = ndimage.correlate1d(ref, taps, axis=0, mode="reflect")
        assert np.allclose(ours, ref, atol=1e-10)


def test_sobel_matches_explicit_loops():
    rng = np.random.default_rng(7)
    img = rng.random((12, 10)) * 255.0
    gx, gy, mag = fallback.sobel_gradients(img)
    h, w = img.shape
    kx = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
    ky = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            win = img[y - 1:y + 2, x - 1:x + 2]
            assert abs(gx[y, x] - float(np.sum(win * kx))) < 1e-9
            assert abs(gy[y, x] - float(np.sum(win * ky))) < 1e-9
    assert np.allclose(mag, np.hypot(gx, gy))
    assert not gx[0].any() and not gx[-1].any()
    assert not gx[:, 0].any() and not gx[:, -1].any()


def test_hysteresis_matches_label_oracle():
    rng = np.random.default_rng(8)
    thin = rng.random((30, 40)) * 200.0
    low, high = 60.0, 140.0
    ours = fallback.hysteresis(thin, low, high).astype(bool)
    weak = thin >= low
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), int))
    keep_ids = set(np.unique(labels[(thin >= high) & weak])) - {0}
    ref = np.isin(labels, sorted(keep_ids))
    ref[0, :] = ref[-1, :] = False
    ref[:, 0] = ref[:, -1] = False
    assert np.array_equal(ours, ref)


def test_dilate_matches_scipy():
    rng = np.random.default_rng(9)
    mask = (rng.random((25, 31)) < 0.2).astype(np.uint8)
    ref = ndimage.binary_dilation(mask.astype(bool), np.ones((3, 3), bool))
    assert np.array_equal(fallback.dilate3(mask).astype(bool), ref)


def test_trace_single_pixel():
    mask = np.zeros((5, 5), dtype=np.uint8)
    mask[2, 3] = 1
    chains = fallback.trace_borders(mask)
    assert len(chains) == 1
    assert chains[0].tolist() == [[3, 2]]


def test_trace_block_border():
    mask = np.zeros((7, 7), dtype=np.uint8)
    mask[2:5, 2:5] = 1
    chains = fallback.trace_borders(mask)
    assert len(chains) == 1
    got = set(map(tuple, chains[0]))
    expect = {(x, y) for y in range(2, 5) for x in range(2, 5)} - {(3, 3)}
    assert got == expect


def test_trace_chains_well_formed_and_cover_borders():
    # chains stay on the mask, step 8-connected, and jointly cover every
    # border pixel; chains are allowed to share pixels where an outer and a
    # hole border cross the same one-pixel neck
    rng = np.random.default_rng(10)
    for trial in range(25):
        h = int(rng.integers(5, 30))
        w = int(rng.integers(5, 30))
        mask = (rng.random((h, w)) < rng.uniform(0.2, 0.6)).astype(np.uint8)
        chains = fallback.trace_borders(mask)
        covered = set()
        for chain in chains:
            covered |= set(map(tuple, chain.tolist()))
            for (x0, y0), (x1, y1) in zip(chain, chain[1:]):
                assert max(abs(x1 - x0), abs(y1 - y0)) == 1
            for x, y in chain:
                assert mask[y, x]
        padded = np.zeros((h + 2, w + 2), dtype=bool)
        padded[1:-1, 1:-1] = mask.astype(bool)
        on = padded[1:-1, 1:-1]
        border = on & ~(padded[:-2, 1:-1] & padded[2:, 1:-1]
                        & padded[1:-1, :-2] & padded[1:-1, 2:])
        expected = set(map(tuple, np.argwhere(border)[:, ::-1].tolist()))
        assert covered == expected


def test_trace_recovers_hole_border_behind_neck():
    # the outer border runs through both one-pixel necks and claims the
    # enclosed pocket's bank pixel; the pocket border must still be traced
    mask = np.array([
        [0, 0, 0, 0, 0],
        [0, 0, 1, 0, 1],
        [0, 1, 1, 1, 1],
        [1, 0, 0, 0, 1],
        [0, 1, 1, 1, 0]], dtype=np.uint8)
    chains = fallback.trace_borders(mask)
    assert len(chains) == 2
    covered = set()
    for chain in chains:
        covered |= set(map(tuple, chain.tolist()))
    assert covered == set(map(tuple, np.argwhere(mask)[:, ::-1].tolist()))
