"""Grayscale image file I/O: 8-bit PNG and binary PGM (P5).

Color inputs collapse to luma 0.299 R + 0.587 G + 0.114 B, rounded to the
nearest integer.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

__all__ = ["load_image", "save_image", "to_grayscale"]


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Collapse an (h, w, 3) uint8 array to luma; pass grayscale through."""
    if rgb.ndim == 2:
        return rgb.astype(np.uint8, copy=False)
    luma = (0.299 * rgb[..., 0].astype(np.float64)
            + 0.587 * rgb[..., 1].astype(np.float64)
            + 0.114 * rgb[..., 2].astype(np.float64))
    return np.rint(luma).astype(np.uint8)


def _load_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    # header: magic, width, height, maxval as whitespace-separated tokens,
    # # comments allowed between them
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < 4:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if i < len(data) and data[i:i + 1] == b"#":
            while i < len(data) and data[i:i + 1] != b"\n":
                i += 1
            continue
        j = i
        while j < len(data) and not data[j:j + 1].isspace():
            j += 1
        if j == i:
            raise ValueError(f"truncated PGM header in {path}")
        tokens.append(data[i:j])
        i = j
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM (P5) file: {path}")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ValueError(f"only 8-bit PGM supported, maxval={maxval} in {path}")
    i += 1  # single whitespace byte after maxval
    raw = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=i)
    return raw.reshape(h, w).copy()


def _save_pgm(path: str, img: np.ndarray) -> None:
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())


def load_image(path: str) -> np.ndarray:
    """Load a PNG or PGM file as an (h, w) uint8 array."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        return _load_pgm(path)
    with Image.open(path) as im:
        if im.mode in ("L", "1"):
            return np.asarray(im.convert("L"), dtype=np.uint8)
        arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return to_grayscale(arr)


def save_image(path: str, img: np.ndarray) -> None:
    """Save an (h, w) uint8 array as PNG or PGM, chosen by extension."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        _save_pgm(path, img)
        return
    Image.fromarray(np.ascontiguousarray(img, dtype=np.uint8), mode="L").save(path)
