"""Real-time detection and tracking of concentric elliptical markers."""

from .errors import (ElliptrackError, InvalidScale, EmptyRoi, ImageTooSmall,
                     TooFewPoints, DegenerateFit, NotAnEllipse, InvalidSpec,
                     DatasetFormatError, EmptyInput, ConfigError)
from .geometry import (Ellipse, Conic, fit_ellipse, conic_to_geometric,
                       geometric_to_conic, canonical_ellipse)
from .image import Roi, clamp_roi, scale_image, extract_roi
from .edges import CannyParams, detect_edges
from .contours import Contour, extract_contours
from .detector import (DetectionThresholds, ScoredEllipse, detect_ellipses,
                       group_concentric, contour_overlap, ellipse_overlap)
from .tracker import (TrackerConfig, TrackerState, track_step,
                      track_step_annotated, detect_target, calculate_roi,
                      compensate_offset)
from .eval import (MetricsReport, FrameOutcome, classify_frame, ellipse_iou,
                   compute_metrics, run_benchmark, sweep_parameter,
                   DatasetAdapter, load_dataset)
from .synth import (SceneSpec, GroundTruthRecord, render_frame,
                    generate_sequence, target_at, build_case_spec,
                    build_acceptance_spec)

__version__ = "0.1.0"

__all__ = [
    "ElliptrackError", "InvalidScale", "EmptyRoi", "ImageTooSmall",
    "TooFewPoints", "DegenerateFit", "NotAnEllipse", "InvalidSpec",
    "DatasetFormatError", "EmptyInput", "ConfigError",
    "Ellipse", "Conic", "fit_ellipse", "conic_to_geometric",
    "geometric_to_conic", "canonical_ellipse",
    "Roi", "clamp_roi", "scale_image", "extract_roi",
    "CannyParams", "detect_edges",
    "Contour", "extract_contours",
    "DetectionThresholds", "ScoredEllipse", "detect_ellipses",
    "group_concentric", "contour_overlap", "ellipse_overlap",
    "TrackerConfig", "TrackerState", "track_step", "track_step_annotated",
    "detect_target", "calculate_roi", "compensate_offset",
    "MetricsReport", "FrameOutcome", "classify_frame", "ellipse_iou",
    "compute_metrics", "run_benchmark", "sweep_parameter",
    "DatasetAdapter", "load_dataset",
    "SceneSpec", "GroundTruthRecord", "render_frame", "generate_sequence",
    "target_at", "build_case_spec", "build_acceptance_spec",
    "__version__",
]
