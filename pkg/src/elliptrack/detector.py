"""Single-frame ellipse detection: the contour-fit-and-reject cascade.

Each contour runs through cheap size gates, a least-squares fit, axis-shape
gates, then two overlap scores: the fraction of contour pixels on the fitted
ellipse (fit quality) and the fraction of ellipse pixels on the edge map
(support in the image, robust to contours that cover only an arc).
Survivors are grouped by concentricity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .contours import Contour, extract_contours
from .edges import CannyParams, detect_edges
from .errors import DegenerateFit, NotAnEllipse, TooFewPoints
from .geometry import Ellipse, fit_ellipse
from .image import count_intersection, dilate, rasterize_ellipse_perimeter

__all__ = [
    "DetectionThresholds",
    "ScoredEllipse",
    "contour_overlap",
    "ellipse_overlap",
    "detect_ellipses",
    "group_concentric",
]


@dataclass(frozen=True)
class DetectionThresholds:
    """Rejection-cascade parameter bundle.

    Defaults are the strict detection-mode values; ``tracking()`` gives the
    relaxed bundle used once a target is locked.
    """

    contour_overlap: float = 0.95
    ellipse_overlap: float = 0.95
    min_axis_size: float = 5.0
    max_axis_size: float = 700.0
    max_axis_ratio: float = 5.0
    min_contour_size: int = 50

    def __post_init__(self):
        if not (0.0 <= self.contour_overlap <= 1.0 and 0.0 <= self.ellipse_overlap <= 1.0):
            raise ValueError("overlap thresholds must lie in [0, 1]")
        if self.min_axis_size > self.max_axis_size:
            raise ValueError(f"min_axis_size {self.min_axis_size} exceeds "
                             f"max_axis_size {self.max_axis_size}")
        if self.max_axis_ratio < 1.0:
            raise ValueError(f"max_axis_ratio must be >= 1, got {self.max_axis_ratio}")

    @classmethod
    def detection(cls) -> "DetectionThresholds":
        """Strict bundle for searching a full frame without a prior."""
        return cls()

    @classmethod
    def tracking(cls) -> "DetectionThresholds":
        """Relaxed bundle for re-acquiring a target inside its ROI."""
        return cls(contour_overlap=0.7, ellipse_overlap=0.3)

    def with_scale(self, divisor: int) -> "DetectionThresholds":
        """Divide pixel-denominated gates by the image scale divisor.

        A 50-px contour at full resolution is 25 px after downscaling by 2;
        ratio thresholds are scale-free and stay put.
        """
        if divisor == 1:
            return self
        return replace(self,
                       min_axis_size=self.min_axis_size / divisor,
                       min_contour_size=max(1, self.min_contour_size // divisor))


@dataclass(frozen=True)
class ScoredEllipse:
    """A cascade survivor with its two overlap scores."""

    ellipse: Ellipse
    contour_overlap_score: float
    ellipse_overlap_score: float
    source_contour_index: int


def contour_overlap(contour: Contour, ellipse: Ellipse,
                    width: int, height: int) -> float:
    """Fraction of the contour's pixels lying on the fitted ellipse.

    The ellipse perimeter is rasterized, clipped to the image, and dilated
    once so 1-px rasterization jitter does not count against the contour.
    """
    pts = contour.unique_points()
    if pts.shape[0] == 0:
        return 0.0
    raster = rasterize_ellipse_perimeter(ellipse, width, height)
    if raster.shape[0] == 0:
        return 0.0
    # dilated raster as a mask over its own padded bbox; contour points
    # outside it cannot intersect and fall out of count_intersection
    x0 = int(raster[:, 0].min()) - 1
    y0 = int(raster[:, 1].min()) - 1
    mw = int(raster[:, 0].max()) + 2 - x0
    mh = int(raster[:, 1].max()) + 2 - y0
    mask = np.zeros((mh, mw), dtype=np.uint8)
    mask[raster[:, 1] - y0, raster[:, 0] - x0] = 1
    mask = dilate(mask)
    hits = count_intersection(pts - np.array([x0, y0], dtype=pts.dtype), mask)
    return hits / pts.shape[0]


def ellipse_overlap(ellipse: Ellipse, edges: np.ndarray) -> float:
    """Fraction of the in-bounds ellipse perimeter covered by edges.

    Edges are dilated once before intersecting; the denominator counts only
    perimeter pixels inside the image, so partially visible targets are not
    penalized for the hidden part.
    """
    h, w = edges.shape
    return _ellipse_overlap_dilated(ellipse, dilate(edges), w, h)


def _ellipse_overlap_dilated(ellipse: Ellipse, dilated_edges: np.ndarray,
                             width: int, height: int) -> float:
    raster = rasterize_ellipse_perimeter(ellipse, width, height)
    if raster.shape[0] == 0:
        return 0.0
    return count_intersection(raster, dilated_edges) / raster.shape[0]


def detect_ellipses(frame: np.ndarray,
                    thresholds: DetectionThresholds = DetectionThresholds(),
                    canny: CannyParams = CannyParams()) -> list[ScoredEllipse]:
    """Detect all elliptical shapes in a frame that pass every gate.

    Results are ordered by source contour index.

    Raises:
        ImageTooSmall: frame below 3x3.
    """
    edges = detect_edges(frame, canny)
    return _cascade(edges, extract_contours(edges), thresholds)


def _cascade(edges: np.ndarray, contours: list[Contour],
             thresholds: DetectionThresholds) -> list[ScoredEllipse]:
    """The per-contour gate sequence over a prepared edge map."""
    h, w = edges.shape
    dilated = dilate(edges)
    out: list[ScoredEllipse] = []
    for idx, contour in enumerate(contours):
        pts = contour.unique_points()
        if pts.shape[0] < thresholds.min_contour_size:
            continue
        try:
            ellipse = fit_ellipse(pts)
        except (TooFewPoints, DegenerateFit, NotAnEllipse):
            continue
        if 2.0 * ellipse.a > thresholds.max_axis_size:
            continue
        if 2.0 * ellipse.b < thresholds.min_axis_size:
            continue
        if ellipse.a / ellipse.b > thresholds.max_axis_ratio:
            continue
        co = contour_overlap(contour, ellipse, w, h)
        if co < thresholds.contour_overlap:
            continue
        eo = _ellipse_overlap_dilated(ellipse, dilated, w, h)
        if eo < thresholds.ellipse_overlap:
            continue
        out.append(ScoredEllipse(ellipse, co, eo, idx))
    return out


def group_concentric(detections: list[ScoredEllipse],
                     center_tolerance: float = 5.0) -> list[list[ScoredEllipse]]:
    """Partition detections into concentric groups by center distance.

    Groups are connected components of the within-tolerance relation.  When
    at least one group holds >= 2 members, singleton groups are discarded
    (a lone ellipse without a concentric partner is no ring pattern); with
    no such evidence every detection survives as its own group.
    """
    n = len(detections)
    if n == 0:
        return []
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        ei = detections[i].ellipse
        for j in range(i + 1, n):
            ej = detections[j].ellipse
            if math.hypot(ei.cx - ej.cx, ei.cy - ej.cy) <= center_tolerance:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[ScoredEllipse]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(detections[i])
    ordered = [groups[k] for k in sorted(groups)]
    if any(len(g) >= 2 for g in ordered):
        return [g for g in ordered if len(g) >= 2]
    return ordered
