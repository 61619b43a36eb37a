"""Command line front end.

Subcommands: detect (single image), track (frame directory), bench
(annotated dataset -> metrics), sweep (threshold sensitivity), synth
(generate test sequences), serve (calibration web service).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .config import load_thresholds, load_tracker_config
from .detector import DetectionThresholds, detect_ellipses, group_concentric
from .edges import CannyParams, detect_edges
from .errors import ElliptrackError
from .eval import (DatasetAdapter, run_benchmark, sweep_parameter,
                   write_frame_rows, SWEEP_COLUMNS)
from .imageio import load_image, save_image
from .synth import CASES, build_acceptance_spec, build_case_spec, generate_sequence
from .tracker import TrackerConfig, TrackerState, track_step


def _cmd_detect(args) -> int:
    img = load_image(args.input)
    if args.config:
        thresholds = load_thresholds(args.config)
    else:
        thresholds = DetectionThresholds.detection()
    canny = CannyParams()
    if args.dump_edges:
        edges = detect_edges(img, canny)
        save_image(args.dump_edges, edges * 255)
    detections = detect_ellipses(img, thresholds, canny)
    groups = group_concentric(detections)
    print(f"{len(detections)} candidate(s), {len(groups)} concentric group(s)")
    for gi, group in enumerate(groups):
        for d in group:
            e = d.ellipse
            print(f"group {gi}: center=({e.cx:.2f}, {e.cy:.2f}) "
                  f"axes=({e.a:.2f}, {e.b:.2f}) theta={e.theta:.4f} "
                  f"co={d.contour_overlap_score:.3f} eo={d.ellipse_overlap_score:.3f}")
    return 0


def _cmd_track(args) -> int:
    if args.config:
        cfg, canny = load_tracker_config(args.config)
    else:
        cfg, canny = TrackerConfig(), CannyParams()
    names = sorted(n for n in os.listdir(args.input)
                   if os.path.splitext(n)[1].lower() in (".png", ".pgm"))
    if not names:
        print(f"no frames under {args.input}", file=sys.stderr)
        return 2
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        print("frame_index,found,cx,cy,a,b,theta,scale,roi_x,roi_y,roi_w,roi_h,ms_elapsed",
              file=out)
        state = TrackerState()
        for i, name in enumerate(names):
            frame = load_image(os.path.join(args.input, name))
            t0 = time.perf_counter()
            target, state = track_step(state, frame, cfg, canny)
            ms = (time.perf_counter() - t0) * 1000.0
            if target is not None:
                e = target
                pose = f"{e.cx:.3f},{e.cy:.3f},{e.a:.3f},{e.b:.3f},{e.theta:.5f}"
            else:
                pose = ",,,,"
            roi = state.roi
            roi_s = (f"{roi.x},{roi.y},{roi.width},{roi.height}"
                     if roi is not None else ",,,")
            print(f"{i},{int(target is not None)},{pose},{state.scale},{roi_s},{ms:.2f}",
                  file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _load_adapter(path: str | None) -> DatasetAdapter | None:
    return DatasetAdapter.from_json(path) if path else None


def _cmd_bench(args) -> int:
    if args.config:
        cfg, canny = load_tracker_config(args.config)
    else:
        cfg, canny = TrackerConfig(), CannyParams()
    report, rows = run_benchmark(args.dataset, cfg, canny,
                                 match_iou=args.match_iou,
                                 adapter=_load_adapter(args.adapter))
    payload = report.to_dict()
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    if args.frames:
        write_frame_rows(args.frames, rows)
    return 0


def _parse_values(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ElliptrackError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ElliptrackError("range step must be positive")
        values = []
        v = start
        while v <= stop + 1e-9:
            values.append(round(v, 10))
            v += step
        return values
    return [float(p) for p in text.split(",") if p.strip()]


def _cmd_sweep(args) -> int:
    if args.config:
        cfg, canny = load_tracker_config(args.config)
    else:
        cfg, canny = TrackerConfig(), CannyParams()
    values = _parse_values(args.values)
    rows = sweep_parameter(args.dataset, args.param, values,
                           fixed_other=args.fixed, cfg=cfg, canny=canny,
                           match_iou=args.match_iou,
                           adapter=_load_adapter(args.adapter))
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        print(",".join(SWEEP_COLUMNS), file=out)
        for row in rows:
            print(",".join(str(row[c]) for c in SWEEP_COLUMNS), file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_synth(args) -> int:
    if args.case == "acceptance":
        spec, n = build_acceptance_spec()
        frames = args.frames if args.frames else n
    else:
        frames = args.frames if args.frames else 24
        spec = build_case_spec(args.case, n_frames=frames, noise_sigma=args.noise)
    records = generate_sequence(spec, frames, seed=args.seed, out_dir=args.out)
    present = sum(1 for r in records if r.target_present)
    print(f"wrote {frames} frame(s) to {args.out} ({present} with target)")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    host, _, port = args.bind.rpartition(":")
    if args.config:
        cfg, canny = load_tracker_config(args.config)
    else:
        cfg, canny = None, None
    serve(args.source, host=host or "127.0.0.1", port=int(port),
          fps=args.fps, cfg=cfg, canny=canny)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elliptrack",
                                     description="concentric ellipse detection and tracking")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect ellipses in one image")
    p.add_argument("--input", required=True, help="PNG or PGM image")
    p.add_argument("--config", help="key=value parameter file")
    p.add_argument("--dump-edges", help="write the edge map to this path")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("track", help="track across a frame directory")
    p.add_argument("--input", required=True, help="directory of frames")
    p.add_argument("--config", help="key=value parameter file")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("bench", help="run a dataset and report metrics")
    p.add_argument("--dataset", required=True, help="frames plus ground_truth.csv")
    p.add_argument("--config", help="key=value parameter file")
    p.add_argument("--match-iou", type=float, default=0.8)
    p.add_argument("--adapter", help="JSON dataset adapter description")
    p.add_argument("--out", help="write the JSON report here too")
    p.add_argument("--frames", help="write per-frame outcome CSV here")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("sweep", help="sweep one overlap threshold")
    p.add_argument("--dataset", required=True)
    p.add_argument("--param", required=True,
                   choices=["contour", "ellipse"],
                   help="which overlap threshold to sweep")
    p.add_argument("--values", required=True,
                   help="comma list or start:stop:step range")
    p.add_argument("--fixed", type=float, default=0.7,
                   help="value held for the other overlap threshold")
    p.add_argument("--config", help="key=value parameter file")
    p.add_argument("--match-iou", type=float, default=0.8)
    p.add_argument("--adapter", help="JSON dataset adapter description")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic sequence")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--case", default="a", choices=list(CASES) + ["acceptance"])
    p.add_argument("--frames", type=int, default=0,
                   help="frame count (default: case-dependent)")
    p.add_argument("--noise", type=float, default=0.0,
                   help="gaussian noise sigma for the letter cases")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("serve", help="run the calibration web service")
    p.add_argument("--source", required=True, help="directory of frames to replay")
    p.add_argument("--bind", default="127.0.0.1:8700", help="HOST:PORT")
    p.add_argument("--fps", type=float, default=10.0)
    p.add_argument("--config", help="key=value parameter file")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ElliptrackError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
