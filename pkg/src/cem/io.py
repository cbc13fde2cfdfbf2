"""CSV datasets and plain-text graymap masks."""

from __future__ import annotations

from pathlib import Path

import numpy as np


class DataFormatError(ValueError):
    """A dataset file could not be parsed; the message names the line."""


def load_dataset(path, n_features: int | None = None, lo=None, hi=None):
    """Read comma-separated rows of features with a trailing integer label.

    Returns ``(X, y)``. Blank lines are skipped. ``n_features`` and the
    scalar bounds ``lo``/``hi`` are checked when given.
    """
    X, y = [], []
    width = n_features
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = [c.strip() for c in line.split(",")]
            if len(cells) < 2:
                raise DataFormatError(f"line {lineno}: need at least one feature and a label")
            try:
                feats = [float(c) for c in cells[:-1]]
            except ValueError as exc:
                raise DataFormatError(f"line {lineno}: {exc}") from None
            try:
                label = float(cells[-1])
            except ValueError:
                raise DataFormatError(f"line {lineno}: label {cells[-1]!r} is not a number") from None
            if label != int(label) or label < 0:
                raise DataFormatError(f"line {lineno}: label {cells[-1]!r} is not a non-negative integer")
            if width is None:
                width = len(feats)
            elif len(feats) != width:
                raise DataFormatError(f"line {lineno}: expected {width} features, found {len(feats)}")
            row = np.array(feats)
            if not np.all(np.isfinite(row)):
                raise DataFormatError(f"line {lineno}: non-finite feature")
            if (lo is not None and np.any(row < lo)) or (hi is not None and np.any(row > hi)):
                raise DataFormatError(f"line {lineno}: feature outside [{lo}, {hi}]")
            X.append(row)
            y.append(int(label))
    if not X:
        raise DataFormatError(f"{path}: no data rows")
    return np.vstack(X), np.array(y, dtype=np.int64)


def save_dataset(path, X, y) -> None:
    """Write rows with 17 significant digits so :func:`load_dataset` reads back identical values."""
    X = np.asarray(X, dtype=np.float64)
    lines = [",".join(format(v, ".17g") for v in row) + f",{int(lab)}" for row, lab in zip(X, y)]
    Path(path).write_text("\n".join(lines) + "\n")


def mask_pixels(delta, shape, scale: float) -> np.ndarray:
    """``round(255 * |delta| / scale)`` clipped to 0..255, reshaped to ``shape``."""
    rows, cols = shape
    delta = np.asarray(delta, dtype=np.float64)
    if delta.size != rows * cols:
        raise ValueError(f"image shape {rows}x{cols} does not match {delta.size} features")
    if not scale > 0:
        raise ValueError("scale must be positive")
    px = np.rint(255.0 * np.abs(delta) / scale)
    return np.clip(px, 0, 255).astype(int).reshape(rows, cols)


def write_pgm(path, delta, shape, scale: float = 1.0) -> None:
    """ASCII (P2) graymap of a perturbation, maxval 255."""
    px = mask_pixels(delta, shape, scale)
    rows, cols = shape
    body = "\n".join(" ".join(str(v) for v in row) for row in px)
    Path(path).write_text(f"P2\n{cols} {rows}\n255\n{body}\n")


def read_pgm(path) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if not tokens or tokens[0] != "P2":
        raise DataFormatError(f"{path}: not an ASCII graymap")
    cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    vals = np.array([int(t) for t in tokens[4:]])
    if vals.size != rows * cols or np.any(vals > maxval):
        raise DataFormatError(f"{path}: pixel data does not match header")
    return vals.reshape(rows, cols)
