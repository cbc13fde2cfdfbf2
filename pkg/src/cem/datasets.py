"""Toy datasets used by the demos and the acceptance suite.

Both live in ``[0, 1]^d`` with background 0, so pertinent negatives add
signal and pertinent positives keep a subset of it.
"""

from __future__ import annotations

import numpy as np

BLOB_CENTERS = np.array([[0.6, 0.2], [0.2, 0.6]])


def make_blobs(n: int = 200, sigma: float = 0.07, seed: int = 0):
    """Two Gaussian blobs in the unit square, clipped to ``[0, 1]``.

    Centers sit on either side of the diagonal, about 4 sigma from it at the
    default spread, so a linear model separates them.
    """
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = BLOB_CENTERS[y] + rng.normal(0.0, sigma, size=(n, 2))
    return np.clip(X, 0.0, 1.0), y


def glyph_templates(size: int = 8) -> np.ndarray:
    """Two binary glyphs: a vertical bar ("1") and a ring ("0")."""
    bar = np.zeros((size, size))
    mid = size // 2
    bar[1 : size - 1, mid - 1 : mid + 1] = 1.0
    ring = np.zeros((size, size))
    ring[1, 2 : size - 2] = ring[size - 2, 2 : size - 2] = 1.0
    ring[2 : size - 2, 1] = ring[2 : size - 2, size - 2] = 1.0
    return np.stack([bar.ravel(), ring.ravel()])


def make_glyphs(n: int = 200, noise: float = 0.15, dropout: float = 0.15, seed: int = 0, size: int = 8):
    """Noisy 8x8 two-glyph "digits" with values in ``[0, 1]``.

    Each sample is a template with random stroke intensities, some stroke
    pixels dropped, and sparse faint speckle on the background.
    """
    rng = np.random.default_rng(seed)
    templates = glyph_templates(size)
    y = np.arange(n) % 2
    X = templates[y].copy()
    X *= rng.uniform(0.6, 1.0, size=X.shape)
    X *= rng.random(X.shape) >= dropout
    speckle = (rng.random(X.shape) < 0.05) * rng.uniform(0.0, noise, size=X.shape)
    X = np.where(templates[y] > 0, X, speckle)
    return np.clip(X, 0.0, 1.0), y
