# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``fallback.py``.

Every function here must produce bit-identical output to its fallback
counterpart; the parity test suite compares them on random inputs.  Keep the
arithmetic order in sync with fallback.py when changing either file.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

__all__ = [
    "gaussian_smooth",
    "sobel_gradients",
    "nonmax_suppress",
    "hysteresis",
    "dilate3",
    "trace_borders",
]

cdef double _TAN_22 = 0.41421356237309503
cdef double _TAN_67 = 2.414213562373095


cdef inline Py_ssize_t _reflect(Py_ssize_t idx, Py_ssize_t n) nogil:
    if idx < 0:
        idx = -idx - 1
    if idx >= n:
        idx = 2 * n - idx - 1
    return idx


def gaussian_smooth(image, taps):
    """Separable Gaussian blur with symmetric boundary reflection."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] img = np.ascontiguousarray(image, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.asarray(taps, dtype=np.float64)
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t ntaps = t.shape[0], radius = ntaps // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=2] tmp = np.zeros((h, w), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((h, w), dtype=np.float64)
    cdef Py_ssize_t y, x, k
    cdef double acc

    with nogil:
        for y in range(h):
            for x in range(w):
                acc = 0.0
                for k in range(ntaps):
                    acc = acc + t[k] * img[y, _reflect(x + (k - radius), w)]
                tmp[y, x] = acc
        for y in range(h):
            for x in range(w):
                acc = 0.0
                for k in range(ntaps):
                    acc = acc + t[k] * tmp[_reflect(y + (k - radius), h), x]
                out[y, x] = acc
    return out


def sobel_gradients(image):
    """3x3 Sobel gradients and magnitude, borders zeroed."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] img = np.ascontiguousarray(image, dtype=np.float64)
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gx = np.zeros((h, w), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gy = np.zeros((h, w), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mag = np.zeros((h, w), dtype=np.float64)
    cdef Py_ssize_t y, x
    cdef double vx, vy

    if h >= 3 and w >= 3:
        with nogil:
            for y in range(1, h - 1):
                for x in range(1, w - 1):
                    vx = ((img[y - 1, x + 1] + 2.0 * img[y, x + 1] + img[y + 1, x + 1])
                          - (img[y - 1, x - 1] + 2.0 * img[y, x - 1] + img[y + 1, x - 1]))
                    vy = ((img[y + 1, x - 1] + 2.0 * img[y + 1, x] + img[y + 1, x + 1])
                          - (img[y - 1, x - 1] + 2.0 * img[y - 1, x] + img[y - 1, x + 1]))
                    gx[y, x] = vx
                    gy[y, x] = vy
    with nogil:
        for y in range(h):
            for x in range(w):
                mag[y, x] = sqrt(gx[y, x] * gx[y, x] + gy[y, x] * gy[y, x])
    return gx, gy, mag


def nonmax_suppress(mag, gx, gy):
    """Thin a gradient magnitude map to local maxima along the gradient."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] m = np.ascontiguousarray(mag, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vgx = np.ascontiguousarray(gx, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vgy = np.ascontiguousarray(gy, dtype=np.float64)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((h, w), dtype=np.float64)
    cdef Py_ssize_t y, x, dx, dy
    cdef double v, agx, agy

    if h < 3 or w < 3:
        return out
    with nogil:
        for y in range(1, h - 1):
            for x in range(1, w - 1):
                v = m[y, x]
                if v <= 0.0:
                    continue
                agx = vgx[y, x]
                agy = vgy[y, x]
                if agx < 0.0:
                    agx = -agx
                if agy < 0.0:
                    agy = -agy
                if agy <= _TAN_22 * agx:
                    dx = 1; dy = 0
                elif agy >= _TAN_67 * agx:
                    dx = 0; dy = 1
                elif vgx[y, x] * vgy[y, x] >= 0.0:
                    dx = 1; dy = 1
                else:
                    dx = 1; dy = -1
                if v > m[y - dy, x - dx] and v >= m[y + dy, x + dx]:
                    out[y, x] = v
    return out


def hysteresis(thin, double low, double high):
    """Double-threshold edge linking over a thinned magnitude map."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] t = np.ascontiguousarray(thin, dtype=np.float64)
    cdef Py_ssize_t h = t.shape[0], w = t.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] sx = np.zeros(h * w, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] sy = np.zeros(h * w, dtype=np.intp)
    cdef Py_ssize_t top = 0, y, x, ny, nx, dy, dx

    with nogil:
        # seed with strong pixels
        for y in range(h):
            for x in range(w):
                if t[y, x] >= high:
                    out[y, x] = 1
                    sx[top] = x
                    sy[top] = y
                    top += 1
        # grow through weak pixels, 8-connected
        while top > 0:
            top -= 1
            x = sx[top]
            y = sy[top]
            for dy in range(-1, 2):
                for dx in range(-1, 2):
                    ny = y + dy
                    nx = x + dx
                    if ny < 0 or ny >= h or nx < 0 or nx >= w:
                        continue
                    if out[ny, nx] == 0 and t[ny, nx] >= low:
                        out[ny, nx] = 1
                        sx[top] = nx
                        sy[top] = ny
                        top += 1
        for x in range(w):
            out[0, x] = 0
            out[h - 1, x] = 0
        for y in range(h):
            out[y, 0] = 0
            out[y, w - 1] = 0
    return out


def dilate3(mask):
    """One 3x3 full-neighborhood dilation of a 0/1 mask."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(
        np.asarray(mask).astype(bool), dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((h, w), dtype=np.uint8)
    cdef Py_ssize_t y, x, ny, nx, dy, dx

    with nogil:
        for y in range(h):
            for x in range(w):
                if m[y, x]:
                    for dy in range(-1, 2):
                        ny = y + dy
                        if ny < 0 or ny >= h:
                            continue
                        for dx in range(-1, 2):
                            nx = x + dx
                            if nx < 0 or nx >= w:
                                continue
                            out[ny, nx] = 1
    return out


# Moore neighborhood, clockwise from East in image coordinates (y grows down).
cdef int[8] _DX = [1, 1, 0, -1, -1, -1, 0, 1]
cdef int[8] _DY = [0, 1, 1, 1, 0, -1, -1, -1]


cdef _trace_one(cnp.ndarray[cnp.uint8_t, ndim=2] padded,
                Py_ssize_t sx, Py_ssize_t sy, Py_ssize_t d0):
    """Follow one border clockwise from (sx, sy) until the cycle closes."""
    # a 1-px-wide line is walked out and back, so a chain can exceed the
    # region pixel count; the buffer doubles on demand
    cdef cnp.ndarray[cnp.int32_t, ndim=2] buf = np.zeros((1024, 2), dtype=np.int32)
    cdef Py_ssize_t cap = 1024
    cdef Py_ssize_t k, d, fd, nd, back
    cdef Py_ssize_t cx, cy, fx, fy, nx, ny, npts

    # first step: clockwise scan starting just after the background direction
    fd = -1
    for k in range(1, 9):
        d = (d0 + k) % 8
        if padded[sy + _DY[d], sx + _DX[d]]:
            fd = d
            break
    if fd < 0:
        return np.array([[sx - 1, sy - 1]], dtype=np.int32)
    buf[0, 0] = <cnp.int32_t> sx
    buf[0, 1] = <cnp.int32_t> sy
    npts = 1
    fx = sx + _DX[fd]
    fy = sy + _DY[fd]
    cx = fx
    cy = fy
    d = fd
    while True:
        if npts + 1 >= cap:
            buf = np.concatenate([buf, np.zeros((cap, 2), dtype=np.int32)])
            cap *= 2
        buf[npts, 0] = <cnp.int32_t> cx
        buf[npts, 1] = <cnp.int32_t> cy
        npts += 1
        back = (d + 4) % 8
        nd = -1
        for k in range(1, 9):
            if padded[cy + _DY[(back + k) % 8], cx + _DX[(back + k) % 8]]:
                nd = (back + k) % 8
                break
        if nd < 0:
            break
        nx = cx + _DX[nd]
        ny = cy + _DY[nd]
        if nx == fx and ny == fy and nd == fd:
            break
        cx = nx
        cy = ny
        d = nd
    if npts > 1 and buf[npts - 1, 0] == buf[0, 0] and buf[npts - 1, 1] == buf[0, 1]:
        npts -= 1
    return buf[:npts] - 1  # undo padding


def trace_borders(mask):
    """Extract all border chains of a 0/1 mask by Moore border following.

    A border is the closed pixel cycle where one connected region meets one
    of the background regions around or inside it; each such pair is traced
    exactly once, starting from its first bank pixel in raster order.  Two
    chains of the same region may share pixels across a one-pixel neck, but
    every border pixel appears in at least one chain.  Returns a list of
    (N, 2) int32 arrays of (x, y) points.
    """
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] src = np.ascontiguousarray(
        np.asarray(mask).astype(bool), dtype=np.uint8)
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef Py_ssize_t ph = h + 2, pw = w + 2
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] padded = np.zeros((ph, pw), dtype=np.uint8)
    padded[1:h + 1, 1:w + 1] = src

    # Gating traces on visited pixels is not enough: a border crossing a
    # one-pixel neck claims the start pixel of the hole border behind the
    # neck, and that hole border would then never be traced at all.  The
    # (region, background-region) pair identifies a border unambiguously,
    # so label regions 8-connected and background 4-connected first.
    cdef cnp.ndarray[cnp.int32_t, ndim=2] fg_lab = np.zeros((ph, pw), dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] bg_lab = np.zeros((ph, pw), dtype=np.int32)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] stx = np.zeros(ph * pw, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] sty = np.zeros(ph * pw, dtype=np.intp)
    cdef Py_ssize_t top, y, x, k, cx, cy, nx, ny
    cdef cnp.int32_t nfg = 0, nbg = 0

    with nogil:
        for y in range(ph):
            for x in range(pw):
                if padded[y, x]:
                    if fg_lab[y, x]:
                        continue
                    nfg += 1
                    fg_lab[y, x] = nfg
                    stx[0] = x
                    sty[0] = y
                    top = 1
                    while top > 0:
                        top -= 1
                        cx = stx[top]
                        cy = sty[top]
                        for k in range(8):
                            nx = cx + _DX[k]
                            ny = cy + _DY[k]
                            if padded[ny, nx] and fg_lab[ny, nx] == 0:
                                fg_lab[ny, nx] = nfg
                                stx[top] = nx
                                sty[top] = ny
                                top += 1
                else:
                    if bg_lab[y, x]:
                        continue
                    nbg += 1
                    bg_lab[y, x] = nbg
                    stx[0] = x
                    sty[0] = y
                    top = 1
                    while top > 0:
                        top -= 1
                        cx = stx[top]
                        cy = sty[top]
                        for k in range(0, 8, 2):
                            nx = cx + _DX[k]
                            ny = cy + _DY[k]
                            if nx < 0 or nx >= pw or ny < 0 or ny >= ph:
                                continue
                            if padded[ny, nx] == 0 and bg_lab[ny, nx] == 0:
                                bg_lab[ny, nx] = nbg
                                stx[top] = nx
                                sty[top] = ny
                                top += 1

    # candidate start pixels: region pixel with background West (trace with
    # d0=4) or background East (d0=0); visited in raster order, West first
    # at a pixel qualifying both ways
    cdef long long key, span = nbg + 1
    done = set()
    chains = []
    for y in range(1, h + 1):
        for x in range(1, w + 1):
            if not padded[y, x]:
                continue
            if not padded[y, x - 1]:
                key = <long long> fg_lab[y, x] * span + bg_lab[y, x - 1]
                if key not in done:
                    done.add(key)
                    chains.append(_trace_one(padded, x, y, 4))
            if not padded[y, x + 1]:
                key = <long long> fg_lab[y, x] * span + bg_lab[y, x + 1]
                if key not in done:
                    done.add(key)
                    chains.append(_trace_one(padded, x, y, 0))
    return chains
