"""Benchmark harness: dataset loading, outcome taxonomy, metrics, sweeps.

A frame outcome is one of TP / TN / FP / FN / WD, where WD (wrong detection)
is a frame whose target was visible and something else got detected.  The
positive-match criterion is filled-ellipse IoU against the ground truth.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .detector import DetectionThresholds
from .edges import CannyParams
from .errors import DatasetFormatError, EmptyInput
from .geometry import Ellipse
from .imageio import load_image
from .synth import GROUND_TRUTH_COLUMNS, GroundTruthRecord
from .tracker import TrackerConfig, TrackerState, track_step

__all__ = [
    "OUTCOME_KINDS",
    "FrameOutcome",
    "MetricsReport",
    "DatasetAdapter",
    "ellipse_iou",
    "classify_frame",
    "compute_metrics",
    "load_dataset",
    "run_benchmark",
    "sweep_parameter",
]

OUTCOME_KINDS = ("TP", "TN", "FP", "FN", "WD")

_REQUIRES = {
    # kind -> (needs detection, needs truth)
    "TP": (True, True),
    "WD": (True, True),
    "FP": (True, False),
    "FN": (False, True),
    "TN": (False, False),
}


@dataclass(frozen=True)
class FrameOutcome:
    """Classified result of one frame with its processing time."""

    kind: str
    elapsed_ms: float
    detection: Ellipse | None = None
    truth: Ellipse | None = None

    def __post_init__(self):
        if self.kind not in OUTCOME_KINDS:
            raise ValueError(f"unknown outcome kind {self.kind!r}")
        need_det, need_truth = _REQUIRES[self.kind]
        if (self.detection is not None) != need_det or (self.truth is not None) != need_truth:
            raise ValueError(f"{self.kind} outcome with detection="
                             f"{self.detection is not None} truth={self.truth is not None}")


@dataclass(frozen=True)
class TimingBucket:
    """Per-outcome wall-clock statistics in milliseconds."""

    count: int
    avg_ms: float
    max_ms: float
    min_ms: float


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate counts, ratios and per-outcome timing buckets."""

    n_tp: int
    n_tn: int
    n_fp: int
    n_fn: int
    n_wd: int
    n_all: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    timing: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_tp": self.n_tp, "n_tn": self.n_tn, "n_fp": self.n_fp,
            "n_fn": self.n_fn, "n_wd": self.n_wd, "n_all": self.n_all,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "f1": self.f1,
            "timing": {k: {"count": b.count, "avg_ms": b.avg_ms,
                           "max_ms": b.max_ms, "min_ms": b.min_ms}
                       for k, b in self.timing.items()},
        }


def _fill_mask(e: Ellipse, x0: int, y0: int, w: int, h: int) -> np.ndarray:
    ys, xs = np.mgrid[y0:y0 + h, x0:x0 + w]
    return e.contains_points(xs, ys)


def ellipse_iou(e1: Ellipse, e2: Ellipse) -> float:
    """Filled-area IoU of two ellipses over rasterized integer pixels."""
    hw1, hh1 = e1.bounding_half_extents()
    hw2, hh2 = e2.bounding_half_extents()
    x0 = int(math.floor(min(e1.cx - hw1, e2.cx - hw2)))
    y0 = int(math.floor(min(e1.cy - hh1, e2.cy - hh2)))
    x1 = int(math.ceil(max(e1.cx + hw1, e2.cx + hw2))) + 1
    y1 = int(math.ceil(max(e1.cy + hh1, e2.cy + hh2))) + 1
    m1 = _fill_mask(e1, x0, y0, x1 - x0, y1 - y0)
    m2 = _fill_mask(e2, x0, y0, x1 - x0, y1 - y0)
    inter = int(np.count_nonzero(m1 & m2))
    union = int(np.count_nonzero(m1)) + int(np.count_nonzero(m2)) - inter
    if union == 0:
        return 0.0
    return inter / union


def classify_frame(detection: Ellipse | None,
                   truth: GroundTruthRecord | None,
                   match_iou: float = 0.8) -> str:
    """Outcome kind for one frame under the filled-IoU match criterion."""
    if not (0.0 < match_iou < 1.0):
        raise ValueError(f"match_iou must lie in (0, 1), got {match_iou}")
    truth_e = truth.ellipse if truth is not None and truth.target_present else None
    if truth_e is None:
        return "TN" if detection is None else "FP"
    if detection is None:
        return "FN"
    return "TP" if ellipse_iou(detection, truth_e) >= match_iou else "WD"


def compute_metrics(outcomes: list[FrameOutcome]) -> MetricsReport:
    """Counts, summary ratios and timing buckets over classified frames.

    Ratios with a zero denominator come out as 0 so all-negative corpora
    still produce a printable report.

    Raises:
        EmptyInput: no outcomes.
    """
    if not outcomes:
        raise EmptyInput("no outcomes to aggregate")
    counts = {k: 0 for k in OUTCOME_KINDS}
    times: dict[str, list[float]] = {k: [] for k in OUTCOME_KINDS}
    for o in outcomes:
        counts[o.kind] += 1
        times[o.kind].append(o.elapsed_ms)
    tp, tn, fp = counts["TP"], counts["TN"], counts["FP"]
    fn, wd = counts["FN"], counts["WD"]
    n_all = len(outcomes)

    def ratio(num: float, den: float) -> float:
        return num / den if den > 0 else 0.0

    precision = ratio(tp, tp + fp + wd)
    recall = ratio(tp, tp + fn + wd)
    timing = {k: TimingBucket(len(v), sum(v) / len(v), max(v), min(v))
              for k, v in times.items() if v}
    return MetricsReport(
        n_tp=tp, n_tn=tn, n_fp=fp, n_fn=fn, n_wd=wd, n_all=n_all,
        accuracy=ratio(tp + tn, n_all),
        precision=precision,
        recall=recall,
        f1=ratio(2.0 * precision * recall, precision + recall),
        timing=timing,
    )


@dataclass(frozen=True)
class DatasetAdapter:
    """Column mapping for annotation CSVs that are not our own layout.

    ``columns`` maps our field names (frame_index, cx, cy, a, b, theta,
    target_present, sequence) to the file's header names; unmapped optional
    fields fall back to defaults.  ``axis_scale`` converts full-axis or
    otherwise scaled annotations to semi-axes.
    """

    columns: dict
    annotations: str = "ground_truth.csv"
    delimiter: str = ","
    angle_unit: str = "radians"
    axis_scale: float = 1.0

    @classmethod
    def from_json(cls, path: str) -> "DatasetAdapter":
        with open(path) as fh:
            raw = json.load(fh)
        known = {"columns", "annotations", "delimiter", "angle_unit", "axis_scale"}
        unknown = set(raw) - known
        if unknown:
            raise DatasetFormatError(f"unknown adapter keys {sorted(unknown)}")
        if "columns" not in raw:
            raise DatasetFormatError("adapter requires a 'columns' mapping")
        if raw.get("angle_unit", "radians") not in ("radians", "degrees"):
            raise DatasetFormatError("angle_unit must be 'radians' or 'degrees'")
        return cls(**raw)


_FRAME_EXTENSIONS = (".png", ".pgm")


def _frame_files(path: str) -> list[str]:
    names = sorted(n for n in os.listdir(path)
                   if os.path.splitext(n)[1].lower() in _FRAME_EXTENSIONS)
    if not names:
        raise DatasetFormatError(f"no frame files under {path}")
    return [os.path.join(path, n) for n in names]


def _parse_native_rows(csv_path: str) -> list[GroundTruthRecord]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != GROUND_TRUTH_COLUMNS:
            raise DatasetFormatError(
                f"unexpected ground truth columns {reader.fieldnames} in {csv_path}")
        records = []
        for row in reader:
            idx = int(row["frame_index"])
            if row["target_present"] == "1":
                e = Ellipse(float(row["cx"]), float(row["cy"]), float(row["a"]),
                            float(row["b"]), float(row["theta_rad"]))
                records.append(GroundTruthRecord(idx, True, e,
                                                 float(row["visibility_fraction"])))
            else:
                records.append(GroundTruthRecord(idx, False, None, 0.0))
    return records


def _parse_adapted_rows(csv_path: str, adapter: DatasetAdapter) -> list[GroundTruthRecord]:
    cols = adapter.columns
    for required in ("frame_index", "cx", "cy", "a", "b"):
        if required not in cols:
            raise DatasetFormatError(f"adapter columns missing {required!r}")
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh, delimiter=adapter.delimiter)
        records = []
        for row in reader:
            try:
                idx = int(row[cols["frame_index"]])
                present = True
                if "target_present" in cols:
                    present = row[cols["target_present"]].strip().lower() in ("1", "true", "yes")
                elif row[cols["cx"]].strip() == "":
                    present = False
                seq = row[cols["sequence"]] if "sequence" in cols else None
                if not present:
                    records.append(GroundTruthRecord(idx, False, None, 0.0, seq))
                    continue
                theta = 0.0
                if "theta" in cols:
                    theta = float(row[cols["theta"]])
                    if adapter.angle_unit == "degrees":
                        theta = math.radians(theta)
                theta = math.fmod(theta, math.pi)
                if theta < 0.0:
                    theta += math.pi
                a = float(row[cols["a"]]) * adapter.axis_scale
                b = float(row[cols["b"]]) * adapter.axis_scale
                if a < b:
                    a, b = b, a
                    theta = math.fmod(theta + math.pi / 2.0, math.pi)
                e = Ellipse(float(row[cols["cx"]]), float(row[cols["cy"]]), a, b, theta)
                records.append(GroundTruthRecord(idx, True, e, 1.0, seq))
            except (KeyError, ValueError) as exc:
                raise DatasetFormatError(f"bad annotation row {row}: {exc}") from None
    return records


def load_dataset(path: str,
                 adapter: DatasetAdapter | None = None
                 ) -> list[tuple[np.ndarray, GroundTruthRecord]]:
    """Load frames (lexicographic order) paired with annotation rows.

    Rows are sorted by frame_index and paired positionally with the sorted
    frame files.

    Raises:
        DatasetFormatError: missing/malformed annotations or count mismatch.
    """
    files = _frame_files(path)
    csv_name = adapter.annotations if adapter is not None else "ground_truth.csv"
    csv_path = os.path.join(path, csv_name)
    if not os.path.exists(csv_path):
        raise DatasetFormatError(f"missing annotations file {csv_path}")
    if adapter is None:
        records = _parse_native_rows(csv_path)
    else:
        records = _parse_adapted_rows(csv_path, adapter)
    records.sort(key=lambda r: r.frame_index)
    if len(records) != len(files):
        raise DatasetFormatError(
            f"{len(files)} frames but {len(records)} annotation rows under {path}")
    return [(load_image(f), r) for f, r in zip(files, records)]


@dataclass(frozen=True)
class FrameRow:
    """One per-frame benchmark CSV row."""

    frame_index: int
    kind: str
    elapsed_ms: float
    found: bool
    detection: Ellipse | None
    scale: int


FRAME_CSV_COLUMNS = ["frame_index", "outcome", "elapsed_ms", "found",
                     "cx", "cy", "a", "b", "theta_rad", "scale"]


def write_frame_rows(path: str, rows: list[FrameRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FRAME_CSV_COLUMNS)
        for r in rows:
            if r.detection is not None:
                e = r.detection
                writer.writerow([r.frame_index, r.kind, f"{r.elapsed_ms:.3f}", 1,
                                 f"{e.cx:.2f}", f"{e.cy:.2f}", f"{e.a:.2f}",
                                 f"{e.b:.2f}", f"{e.theta:.4f}", r.scale])
            else:
                writer.writerow([r.frame_index, r.kind, f"{r.elapsed_ms:.3f}", 0,
                                 "", "", "", "", "", r.scale])


def _bench_loaded(items: list[tuple[np.ndarray, GroundTruthRecord]],
                  cfg: TrackerConfig, canny: CannyParams,
                  match_iou: float) -> tuple[MetricsReport, list[FrameRow]]:
    state = TrackerState()
    outcomes: list[FrameOutcome] = []
    rows: list[FrameRow] = []
    prev_seq: str | None = None
    for i, (frame, truth) in enumerate(items):
        if truth.sequence != prev_seq and prev_seq is not None:
            state = TrackerState()
        prev_seq = truth.sequence
        t0 = time.perf_counter()
        target, state = track_step(state, frame, cfg, canny)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        kind = classify_frame(target, truth, match_iou)
        truth_e = truth.ellipse if truth.target_present else None
        outcomes.append(FrameOutcome(kind, elapsed_ms, target, truth_e))
        rows.append(FrameRow(truth.frame_index, kind, elapsed_ms,
                             target is not None, target, state.scale))
    return compute_metrics(outcomes), rows


def run_benchmark(dataset_path: str,
                  cfg: TrackerConfig = TrackerConfig(),
                  canny: CannyParams = CannyParams(),
                  match_iou: float = 0.8,
                  adapter: DatasetAdapter | None = None
                  ) -> tuple[MetricsReport, list[FrameRow]]:
    """Replay a dataset through the tracker and score every frame.

    Frames are preloaded so timings cover the detection pipeline only.
    """
    items = load_dataset(dataset_path, adapter)
    return _bench_loaded(items, cfg, canny, match_iou)


def _cfg_with_overlaps(cfg: TrackerConfig, contour: float,
                       ellipse: float) -> TrackerConfig:
    return replace(
        cfg,
        detect_thresholds=replace(cfg.detect_thresholds,
                                  contour_overlap=contour, ellipse_overlap=ellipse),
        track_thresholds=replace(cfg.track_thresholds,
                                 contour_overlap=contour, ellipse_overlap=ellipse),
    )


SWEEP_COLUMNS = ["value", "accuracy", "precision", "recall", "f1",
                 "TP", "TN", "FP", "FN", "WD", "avg_ms"]


def sweep_parameter(dataset_path: str, parameter: str, values: list[float],
                    fixed_other: float,
                    cfg: TrackerConfig = TrackerConfig(),
                    canny: CannyParams = CannyParams(),
                    match_iou: float = 0.8,
                    adapter: DatasetAdapter | None = None) -> list[dict]:
    """One benchmark run per threshold value, applied to both modes.

    ``parameter`` is "contour" or "ellipse" (the overlap being swept); the
    other overlap is pinned to ``fixed_other`` in both modes as well.
    """
    key = parameter.strip().lower()
    if key in ("contour", "contouroverlap"):
        sweep_contour = True
    elif key in ("ellipse", "ellipseoverlap"):
        sweep_contour = False
    else:
        raise ValueError(f"parameter must be contour or ellipse, got {parameter!r}")
    if not values:
        raise ValueError("values must be non-empty")
    for v in values:
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"sweep value {v} outside [0, 1]")

    items = load_dataset(dataset_path, adapter)
    out = []
    for v in values:
        run_cfg = (_cfg_with_overlaps(cfg, v, fixed_other) if sweep_contour
                   else _cfg_with_overlaps(cfg, fixed_other, v))
        report, rows = _bench_loaded(items, run_cfg, canny, match_iou)
        out.append({
            "value": v,
            "accuracy": report.accuracy,
            "precision": report.precision,
            "recall": report.recall,
            "f1": report.f1,
            "TP": report.n_tp,
            "TN": report.n_tn,
            "FP": report.n_fp,
            "FN": report.n_fn,
            "WD": report.n_wd,
            "avg_ms": sum(r.elapsed_ms for r in rows) / len(rows),
        })
    return out
