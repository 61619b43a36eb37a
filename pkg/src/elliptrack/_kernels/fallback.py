"""Pure-numpy implementations of the per-pixel kernels.

These are the reference implementations; the compiled backend in ``_core``
must produce bit-identical output for every function here.  Keep the
arithmetic order in the two files in sync when changing either.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

__all__ = [
    "gaussian_smooth",
    "sobel_gradients",
    "nonmax_suppress",
    "hysteresis",
    "dilate3",
    "trace_borders",
]

# tan(pi/8) and tan(3pi/8): sector boundaries for gradient direction binning
_TAN_22 = 0.41421356237309503
_TAN_67 = 2.414213562373095


def _reflect_indices(idx: np.ndarray, n: int) -> np.ndarray:
    """Symmetric (half-sample) boundary reflection of out-of-range indices."""
    idx = np.where(idx < 0, -idx - 1, idx)
    idx = np.where(idx >= n, 2 * n - idx - 1, idx)
    return idx


def gaussian_smooth(image: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Separable Gaussian blur with symmetric boundary reflection.

    ``taps`` is the full normalized kernel of odd length.  Accumulation runs
    over taps in ascending index order, rows first, then columns.
    """
    img = np.ascontiguousarray(image, dtype=np.float64)
    taps = np.asarray(taps, dtype=np.float64)
    radius = taps.shape[0] // 2
    h, w = img.shape

    tmp = np.zeros_like(img)
    cols = np.arange(w)
    for k in range(taps.shape[0]):
        src = _reflect_indices(cols + (k - radius), w)
        tmp += taps[k] * img[:, src]

    out = np.zeros_like(img)
    rows = np.arange(h)
    for k in range(taps.shape[0]):
        src = _reflect_indices(rows + (k - radius), h)
        out += taps[k] * tmp[src, :]
    return out


def sobel_gradients(image: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """3x3 Sobel gradients and magnitude, borders zeroed.

    Returns ``(gx, gy, mag)`` with ``mag = sqrt(gx^2 + gy^2)``.
    """
    img = np.ascontiguousarray(image, dtype=np.float64)
    h, w = img.shape
    gx = np.zeros_like(img)
    gy = np.zeros_like(img)
    if h >= 3 and w >= 3:
        c = img[1:-1, 1:-1]  # noqa: F841  (kept for slicing symmetry)
        tl = img[:-2, :-2]
        tc = img[:-2, 1:-1]
        tr = img[:-2, 2:]
        ml = img[1:-1, :-2]
        mr = img[1:-1, 2:]
        bl = img[2:, :-2]
        bc = img[2:, 1:-1]
        br = img[2:, 2:]
        gx[1:-1, 1:-1] = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl)
        gy[1:-1, 1:-1] = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr)
    mag = np.sqrt(gx * gx + gy * gy)
    return gx, gy, mag


def nonmax_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Thin a gradient magnitude map to local maxima along the gradient.

    Direction is binned into 4 sectors by |gy|/|gx| against tan(pi/8) and
    tan(3pi/8).  Along the offset the forward comparison is strict and the
    backward one is >=, so a two-pixel plateau keeps exactly one pixel.
    Border pixels are always suppressed.
    """
    mag = np.ascontiguousarray(mag, dtype=np.float64)
    h, w = mag.shape
    out = np.zeros(mag.shape, dtype=np.float64)
    if h < 3 or w < 3:
        return out
    agx = np.abs(gx)
    agy = np.abs(gy)

    # offset per sector: (dx, dy)
    horiz = agy <= _TAN_22 * agx
    vert = agy >= _TAN_67 * agx
    diag = ~(horiz | vert)
    same_sign = gx * gy >= 0.0

    dx = np.zeros(mag.shape, dtype=np.intp)
    dy = np.zeros(mag.shape, dtype=np.intp)
    dx[horiz] = 1
    dx[vert] = 0
    dy[horiz] = 0
    dy[vert] = 1
    dx[diag] = 1
    dy[diag & same_sign] = 1
    dy[diag & ~same_sign] = -1

    ys, xs = np.mgrid[1:h - 1, 1:w - 1]
    m = mag[1:-1, 1:-1]
    ddx = dx[1:-1, 1:-1]
    ddy = dy[1:-1, 1:-1]
    prev = mag[ys - ddy, xs - ddx]
    nxt = mag[ys + ddy, xs + ddx]
    keep = (m > prev) & (m >= nxt) & (m > 0.0)
    out[1:-1, 1:-1] = np.where(keep, m, 0.0)
    return out


def hysteresis(thin: np.ndarray, low: float, high: float) -> np.ndarray:
    """Double-threshold edge linking over a thinned magnitude map.

    A pixel survives if its value is >= ``high``, or >= ``low`` and
    8-connected (through other surviving-eligible pixels) to one that is.
    Returns a uint8 0/1 map with a forced-zero one-pixel border.
    """
    thin = np.asarray(thin, dtype=np.float64)
    strong = thin >= high
    weak = thin >= low
    grown = ndimage.binary_propagation(strong, structure=np.ones((3, 3), bool), mask=weak)
    out = grown.astype(np.uint8)
    out[0, :] = 0
    out[-1, :] = 0
    out[:, 0] = 0
    out[:, -1] = 0
    return out


def dilate3(mask: np.ndarray) -> np.ndarray:
    """One 3x3 full-neighborhood dilation of a 0/1 mask (uint8 in, uint8 out)."""
    m = np.asarray(mask, dtype=bool)
    return ndimage.binary_dilation(m, structure=np.ones((3, 3), bool)).astype(np.uint8)


# Moore neighborhood, clockwise from East in image coordinates (y grows down).
_DIRS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


def _trace_one(padded: np.ndarray, sx: int, sy: int, d0: int) -> list[tuple[int, int]]:
    """Follow one border clockwise from (sx, sy) until the cycle closes."""
    # first step: clockwise scan starting just after the background direction
    fd = -1
    for k in range(1, 9):
        d = (d0 + k) % 8
        dx, dy = _DIRS[d]
        if padded[sy + dy, sx + dx]:
            fd = d
            break
    if fd < 0:
        return [(sx, sy)]

    pts = [(sx, sy)]
    fx, fy = sx + _DIRS[fd][0], sy + _DIRS[fd][1]
    cx, cy, cd = fx, fy, fd
    while True:
        pts.append((cx, cy))
        back = (cd + 4) % 8
        nd = -1
        for k in range(1, 9):
            d = (back + k) % 8
            dx, dy = _DIRS[d]
            if padded[cy + dy, cx + dx]:
                nd = d
                break
        if nd < 0:
            break  # isolated after first step: cannot happen, defensive
        nx, ny = cx + _DIRS[nd][0], cy + _DIRS[nd][1]
        if (nx, ny, nd) == (fx, fy, fd):
            break
        cx, cy, cd = nx, ny, nd
    if len(pts) > 1 and pts[-1] == pts[0]:
        pts.pop()
    return pts


def trace_borders(mask: np.ndarray) -> list[np.ndarray]:
    """Extract all border chains of a 0/1 mask by Moore border following.

    A border is the closed pixel cycle where one connected region meets one
    of the background regions around or inside it; each such pair is traced
    exactly once, starting from its first bank pixel in raster order.  Two
    chains of the same region may share pixels across a one-pixel neck, but
    every border pixel appears in at least one chain.  Returns a list of
    (N, 2) int32 arrays of (x, y) points.
    """
    m = np.asarray(mask, dtype=bool)
    h, w = m.shape
    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = m

    # Gating traces on visited pixels is not enough: a border crossing a
    # one-pixel neck claims the start pixel of the hole border behind the
    # neck, and that hole border would then never be traced at all.  The
    # (region, background-region) pair identifies a border unambiguously.
    eight = np.ones((3, 3), dtype=bool)
    four = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
    fg_labels, _ = ndimage.label(padded, structure=eight)
    bg_labels, _ = ndimage.label(~padded, structure=four)

    # candidate start pixels: region pixel with background West (trace with
    # d0=4) or background East (d0=0); visited in raster order, West first
    # at a pixel qualifying both ways
    left_off = padded & ~np.roll(padded, 1, axis=1)
    right_off = padded & ~np.roll(padded, -1, axis=1)
    starts = np.argwhere(left_off | right_off)  # raster order (y, x)

    done: set[tuple[int, int]] = set()
    chains: list[np.ndarray] = []
    for y, x in starts:
        fg = fg_labels[y, x]
        if left_off[y, x]:
            pair = (fg, bg_labels[y, x - 1])
            if pair not in done:
                done.add(pair)
                pts = _trace_one(padded, int(x), int(y), 4)
                chains.append(np.array(pts, dtype=np.int32) - 1)  # undo padding
        if right_off[y, x]:
            pair = (fg, bg_labels[y, x + 1])
            if pair not in done:
                done.add(pair)
                pts = _trace_one(padded, int(x), int(y), 0)
                chains.append(np.array(pts, dtype=np.int32) - 1)
    return chains
