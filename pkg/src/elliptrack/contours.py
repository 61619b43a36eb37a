"""Border following: binary edge map in, ordered contour chains out."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

__all__ = ["Contour", "extract_contours"]


@dataclass(frozen=True)
class Contour:
    """Ordered 8-connected chain of border pixels.

    ``points`` is an (N, 2) int32 array of (x, y).  ``is_closed`` is set when
    the first and last points are 8-adjacent, i.e. the chain loops.
    """

    points: np.ndarray
    is_closed: bool

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def unique_points(self) -> np.ndarray:
        """Deduplicated point set; traces revisit pixels on 1-px-wide arms."""
        return np.unique(self.points, axis=0)


def extract_contours(edges: np.ndarray) -> list[Contour]:
    """All outer and hole borders of a binary map as ordered chains.

    Borders appear in raster order of their start pixel; every border pixel
    appears in at least one chain, and two chains of the same region may
    share pixels across a one-pixel neck.  Chains shorter than 3 points are
    dropped (too few to carry a conic).
    """
    out: list[Contour] = []
    for pts in _kernels.active.trace_borders(edges):
        if pts.shape[0] < 3:
            continue
        dx = abs(int(pts[0, 0]) - int(pts[-1, 0]))
        dy = abs(int(pts[0, 1]) - int(pts[-1, 1]))
        out.append(Contour(points=pts, is_closed=max(dx, dy) == 1))
    return out
