"""Synthetic experiment inputs: Gaussian blobs and flat-color test images."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rng_streams
from .core import FeatureDataset
from .errors import InvalidInputError

RED = (255, 0, 0)
GREEN = (0, 255, 0)
BLUE = (0, 0, 255)
BLACK = (0, 0, 0)
WHITE = (255, 255, 255)
ORANGE = (255, 165, 0)
YELLOW = (255, 255, 0)
PURPLE = (128, 0, 128)

SQUARE = 30


@dataclass(frozen=True)
class BlobSpec:
    centers: tuple = ((0.0, 0.0), (10.0, 0.0), (5.0, 8.0))
    sigma: float = 1.0
    points_per_blob: int = 150
    noise_points: int = 50
    seed: int = 0

    def __post_init__(self):
        if len(self.centers) < 1:
            raise InvalidInputError("at least one blob center is required")
        if self.sigma <= 0 or self.points_per_blob < 1 or self.noise_points < 0:
            raise InvalidInputError("sigma > 0, points_per_blob >= 1 and noise_points >= 0 required")


def gen_blobs(spec: BlobSpec = BlobSpec()) -> FeatureDataset:
    """Isotropic Gaussian blobs plus uniform background noise.

    Noise is spread over the bounding box of the centers grown by
    ``3 * sigma``.  Reference labels are the blob index, ``-1`` for noise.
    """
    g = rng_streams.stream(spec.seed, "blobs")
    centers = np.asarray(spec.centers, dtype=np.float64)
    blobs = [c + spec.sigma * g.standard_normal((spec.points_per_blob, 2)) for c in centers]
    lo = centers.min(axis=0) - 3 * spec.sigma
    hi = centers.max(axis=0) + 3 * spec.sigma
    noise = g.uniform(lo, hi, size=(spec.noise_points, 2))
    pts = np.vstack(blobs + [noise])
    labels = np.concatenate([np.full(spec.points_per_blob, i) for i in range(len(centers))]
                            + [np.full(spec.noise_points, -1)])
    return FeatureDataset(pts, ("x", "y"), labels)


def _paint(img, x, y, color):
    img[y:y + SQUARE, x:x + SQUARE] = color


def gen_rgb_squares() -> np.ndarray:
    """120 x 120 black image with red, green and blue 30 px squares."""
    img = np.zeros((120, 120, 3), dtype=np.uint8)
    _paint(img, 15, 15, RED)
    _paint(img, 75, 15, GREEN)
    _paint(img, 45, 75, BLUE)
    return img


def gen_six_colors() -> np.ndarray:
    """180 wide, 120 tall white image with a 2 x 3 grid of 30 px squares.

    Squares keep a 10 px margin to the border; top row red, green, blue,
    bottom row orange, yellow, purple.
    """
    img = np.full((120, 180, 3), 255, dtype=np.uint8)
    xs, ys = (10, 75, 140), (10, 80)
    for color, (y, x) in zip((RED, GREEN, BLUE, ORANGE, YELLOW, PURPLE),
                             [(y, x) for y in ys for x in xs]):
        _paint(img, x, y, color)
    return img
