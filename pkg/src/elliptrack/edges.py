"""Canny edge detection built from the kernel primitives.

Pipeline: Gaussian smoothing (radius = ceil(3 sigma)), 3x3 Sobel gradients,
non-maximum suppression along the quantized gradient direction (4 bins),
double-threshold hysteresis where weak pixels survive only when 8-connected
to a strong pixel.  Image borders are forced to non-edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ImageTooSmall

__all__ = ["CannyParams", "detect_edges", "gaussian_taps"]


@dataclass(frozen=True)
class CannyParams:
    """Canny thresholds and smoothing width."""

    low_threshold: float = 50.0
    high_threshold: float = 150.0
    gaussian_sigma: float = 1.4

    def __post_init__(self):
        if not (self.high_threshold >= self.low_threshold >= 0.0):
            raise ValueError(
                f"need high >= low >= 0, got low={self.low_threshold} "
                f"high={self.high_threshold}")
        if self.gaussian_sigma <= 0.0:
            raise ValueError(f"gaussian_sigma must be positive, got {self.gaussian_sigma}")


def gaussian_taps(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian kernel with radius ceil(3 sigma)."""
    radius = int(math.ceil(3.0 * sigma))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(k * k) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def detect_edges(img: np.ndarray, params: CannyParams = CannyParams()) -> np.ndarray:
    """Run the Canny pipeline; returns a uint8 0/1 edge map.

    Raises:
        ImageTooSmall: either dimension below 3.
    """
    h, w = img.shape
    if h < 3 or w < 3:
        raise ImageTooSmall(f"need at least 3x3, got {w}x{h}")
    k = _kernels.active
    smoothed = k.gaussian_smooth(np.asarray(img, dtype=np.float64),
                                 gaussian_taps(params.gaussian_sigma))
    gx, gy, mag = k.sobel_gradients(smoothed)
    thin = k.nonmax_suppress(mag, gx, gy)
    return k.hysteresis(thin, params.low_threshold, params.high_threshold)
