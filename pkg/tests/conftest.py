"""Shared fixtures: synthetic frames and the session-wide benchmark corpus."""

import time

import numpy as np
import pytest

from elliptrack import Ellipse, build_acceptance_spec, generate_sequence


def ring_frame(width, height, ellipse, stroke, fg=0, bg=255):
    """Hard-edged ring: the band between the ellipse and its inset twin."""
    img = np.full((height, width), bg, dtype=np.uint8)
    ys, xs = np.mgrid[0:height, 0:width]
    inner = Ellipse(ellipse.cx, ellipse.cy, ellipse.a - stroke,
                    ellipse.b - stroke, ellipse.theta)
    band = ellipse.contains_points(xs, ys) & ~inner.contains_points(xs, ys)
    img[band] = fg
    return img


@pytest.fixture(scope="session")
def acceptance_corpus(tmp_path_factory):
    """The 200-frame benchmark corpus; generated once, with its wall time."""
    out = tmp_path_factory.mktemp("corpus")
    spec, n_frames = build_acceptance_spec()
    t0 = time.perf_counter()
    records = generate_sequence(spec, n_frames, seed=7, out_dir=str(out))
    elapsed = time.perf_counter() - t0
    return str(out), records, elapsed
