"""Raster primitives: scaling, ROI cropping, perimeter rasterization, masks.

Images are plain numpy arrays, row-major, indexed ``[y, x]``: grayscale as
uint8 (h, w), binary masks as uint8/bool (h, w).  Pixel point sets are
(N, 2) int32 arrays of (x, y) columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EmptyRoi, InvalidScale
from .geometry import Ellipse

__all__ = [
    "Roi",
    "clamp_roi",
    "scale_image",
    "extract_roi",
    "rasterize_ellipse_perimeter",
    "dilate",
    "count_intersection",
]


@dataclass(frozen=True)
class Roi:
    """Axis-aligned region of interest in full-frame pixel coordinates."""

    x: int
    y: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"roi must be at least 1x1, got {self.width}x{self.height}")


def clamp_roi(roi: Roi, frame_width: int, frame_height: int) -> Roi:
    """Clamp a roi into frame bounds.

    Raises:
        EmptyRoi: no overlap with the frame.
    """
    x0 = max(0, roi.x)
    y0 = max(0, roi.y)
    x1 = min(frame_width, roi.x + roi.width)
    y1 = min(frame_height, roi.y + roi.height)
    if x1 <= x0 or y1 <= y0:
        raise EmptyRoi(f"roi {roi} does not intersect a "
                       f"{frame_width}x{frame_height} frame")
    return Roi(x0, y0, x1 - x0, y1 - y0)


def scale_image(img: np.ndarray, divisor: int) -> np.ndarray:
    """Downscale by block-mean over divisor x divisor blocks.

    Output dimensions are ceil(w/divisor) x ceil(h/divisor); partial border
    blocks average over the pixels they actually cover.  The divisor must be
    a power of two no larger than either dimension.

    Raises:
        InvalidScale: divisor not a power of two, or larger than a dimension.
    """
    if divisor < 1 or (divisor & (divisor - 1)) != 0:
        raise InvalidScale(f"divisor must be a power of two >= 1, got {divisor}")
    h, w = img.shape
    if divisor > w or divisor > h:
        raise InvalidScale(f"divisor {divisor} exceeds image dimensions {w}x{h}")
    if divisor == 1:
        return img.copy()
    row_idx = np.arange(0, h, divisor)
    col_idx = np.arange(0, w, divisor)
    sums = np.add.reduceat(np.add.reduceat(img.astype(np.float64), row_idx, axis=0),
                           col_idx, axis=1)
    row_cnt = np.minimum(divisor, h - row_idx).astype(np.float64)
    col_cnt = np.minimum(divisor, w - col_idx).astype(np.float64)
    counts = row_cnt[:, None] * col_cnt[None, :]
    return np.rint(sums / counts).astype(np.uint8)


def extract_roi(img: np.ndarray, roi: Roi) -> np.ndarray:
    """Copy out the roi region, clamped to image bounds.

    Raises:
        EmptyRoi: roi has no overlap with the image.
    """
    h, w = img.shape
    c = clamp_roi(roi, w, h)
    return img[c.y:c.y + c.height, c.x:c.x + c.width].copy()


def rasterize_ellipse_perimeter(e: Ellipse, clip_width: int, clip_height: int) -> np.ndarray:
    """Integer pixels of the ellipse boundary, deduplicated and clipped.

    Samples the parametric boundary at step 1/max(a, b) radians so
    consecutive samples land at most 1 px apart.  Returns an (N, 2) int32
    array of (x, y); empty (0, 2) if fully clipped.
    """
    n = max(8, int(math.ceil(2.0 * math.pi * max(e.a, e.b))))
    t = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    ct, st = math.cos(e.theta), math.sin(e.theta)
    xa = e.a * np.cos(t)
    yb = e.b * np.sin(t)
    xs = np.rint(e.cx + xa * ct - yb * st).astype(np.int32)
    ys = np.rint(e.cy + xa * st + yb * ct).astype(np.int32)
    pts = np.unique(np.column_stack((xs, ys)), axis=0)
    keep = ((pts[:, 0] >= 0) & (pts[:, 0] < clip_width)
            & (pts[:, 1] >= 0) & (pts[:, 1] < clip_height))
    return pts[keep]


def dilate(mask: np.ndarray) -> np.ndarray:
    """One 3x3 dilation pass over a binary mask (uint8 out)."""
    return _kernels.active.dilate3(mask)


def count_intersection(points: np.ndarray, mask: np.ndarray) -> int:
    """Number of (x, y) points that land on a true pixel of the mask."""
    if points.shape[0] == 0:
        return 0
    h, w = mask.shape
    xs = points[:, 0]
    ys = points[:, 1]
    inb = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    if not inb.any():
        return 0
    return int(np.count_nonzero(mask[ys[inb], xs[inb]]))
