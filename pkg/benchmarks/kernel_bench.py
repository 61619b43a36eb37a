"""Compare the compiled and numpy kernel backends: speed plus exact parity.

Usage::

    python3 benchmarks/kernel_bench.py [--size 640x360] [--reps 20] [--seed 0]

Each kernel runs on identical inputs through both backends; the report shows
per-call times, the speedup, and verifies the outputs are bit-identical.
A full detect_ellipses pass at each backend closes the report.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from elliptrack._kernels import fallback  # noqa: E402

try:
    from elliptrack._kernels import _core
except ImportError:
    _core = None


def _time(fn, args, reps):
    fn(*args)  # warm-up
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps * 1000.0


def _equal(a, b):
    if isinstance(a, (list, tuple)):
        return (len(a) == len(b)
                and all(np.array_equal(x, y) for x, y in zip(a, b)))
    return np.array_equal(a, b)


def _inputs(width, height, seed):
    from elliptrack.edges import gaussian_taps

    rng = np.random.default_rng(seed)
    img = rng.integers(0, 256, (height, width)).astype(np.float64)
    taps = gaussian_taps(1.4)
    smoothed = fallback.gaussian_smooth(img, taps)
    gx, gy, mag = fallback.sobel_gradients(smoothed)
    thinned = fallback.nonmax_suppress(mag, gx, gy)
    edges = fallback.hysteresis(thinned, 50.0, 150.0)
    mask = (rng.random((height, width)) < 0.35).astype(np.uint8)
    return {
        "gaussian_smooth": (img, taps),
        "sobel_gradients": (smoothed,),
        "nonmax_suppress": (mag, gx, gy),
        "hysteresis": (thinned, 50.0, 150.0),
        "dilate3": (edges,),
        "trace_borders": (mask,),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", default="640x360", help="WIDTHxHEIGHT")
    parser.add_argument("--reps", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    width, height = (int(p) for p in args.size.lower().split("x"))

    if _core is None:
        print("compiled backend not importable; nothing to compare")
        return 1

    print(f"{'kernel':<18} {'numpy ms':>10} {'compiled ms':>12} "
          f"{'speedup':>8}   parity")
    mismatches = 0
    for name, inp in _inputs(width, height, args.seed).items():
        fb_fn = getattr(fallback, name)
        co_fn = getattr(_core, name)
        fb_ms = _time(fb_fn, inp, args.reps)
        co_ms = _time(co_fn, inp, args.reps)
        same = _equal(fb_fn(*inp), co_fn(*inp))
        mismatches += not same
        print(f"{name:<18} {fb_ms:>10.3f} {co_ms:>12.3f} "
              f"{fb_ms / co_ms:>7.1f}x   {'bit-identical' if same else 'MISMATCH'}")

    from elliptrack import _kernels
    from elliptrack.detector import DetectionThresholds, detect_ellipses
    from elliptrack.geometry import Ellipse

    e = Ellipse(width / 2.0, height / 2.0, 0.22 * width, 0.14 * width, 0.4)
    inner = Ellipse(e.cx, e.cy, e.a - 8.0, e.b - 8.0, e.theta)
    ys, xs = np.mgrid[0:height, 0:width]
    band = e.contains_points(xs, ys) & ~inner.contains_points(xs, ys)
    frame = np.where(band, 30, 200).astype(np.uint8)
    thresholds = DetectionThresholds.detection()

    results = {}
    for backend in (fallback, _core):
        _kernels.active = backend
        results[backend.__name__] = detect_ellipses(frame, thresholds)
        ms = _time(detect_ellipses, (frame, thresholds), max(3, args.reps // 4))
        label = "numpy" if backend is fallback else "compiled"
        print(f"{'detect_ellipses/' + label:<18} {ms:>10.3f} ms  "
              f"({len(results[backend.__name__])} detections)")
    _kernels.active = _core
    a, b = results.values()
    same = len(a) == len(b) and all(x == y for x, y in zip(a, b))
    mismatches += not same
    print(f"end-to-end parity: {'bit-identical' if same else 'MISMATCH'}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
