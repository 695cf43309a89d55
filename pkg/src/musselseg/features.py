"""Turn images and CSV point files into feature datasets."""

from __future__ import annotations

import csv
import enum
import io

import numpy as np

from .core import FeatureDataset
from .errors import DecodeError, InvalidInputError, ParseError

# sRGB primaries to XYZ, D65 white
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
# white of the matrix itself, so sRGB white lands exactly on L=100, a=b=0
_WHITE_D65 = _RGB_TO_XYZ.sum(axis=1)
_EPS = 216 / 24389
_KAPPA = 24389 / 27

SPATIAL_SCALE = 255.0


class FeatureMode(str, enum.Enum):
    RGBXY = "rgbxy"
    RGB = "rgb"
    LABXY = "labxy"
    LAB = "lab"
    RAW = "raw"

    @property
    def spatial(self) -> bool:
        return self in (FeatureMode.RGBXY, FeatureMode.LABXY)

    @property
    def lab(self) -> bool:
        return self in (FeatureMode.LABXY, FeatureMode.LAB)


def srgb_to_lab(rgb) -> np.ndarray:
    """8-bit sRGB to CIELAB (D65). Accepts any array with a trailing axis of 3."""
    c = np.asarray(rgb, dtype=np.float64) / 255.0
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _RGB_TO_XYZ.T / _WHITE_D65
    f = np.where(xyz > _EPS, np.cbrt(xyz), (_KAPPA * xyz + 16.0) / 116.0)
    L = np.clip(116.0 * f[..., 1] - 16.0, 0.0, 100.0)
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def image_to_dataset(image, mode="rgbxy", spatial_weight: float = 1.0) -> FeatureDataset:
    """One point per pixel, row-major.

    X and Y are scaled to ``[0, 255 * spatial_weight]``; a zero weight drops
    them so the XY modes collapse to their color-only counterparts.
    """
    mode = FeatureMode(mode)
    if mode is FeatureMode.RAW:
        raise InvalidInputError("raw mode applies to CSV data, not images")
    if spatial_weight < 0:
        raise InvalidInputError("spatial_weight must be >= 0")
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise DecodeError(f"expected an H x W x 3 uint8 image, got {img.shape} {img.dtype}")
    h, w = img.shape[:2]
    if h < 1 or w < 1:
        raise DecodeError("image has no pixels")
    rgb = img.reshape(-1, 3)
    if mode.lab:
        color, names = srgb_to_lab(rgb), ["L", "a", "b"]
    else:
        color, names = rgb.astype(np.float64), ["R", "G", "B"]
    if not mode.spatial or spatial_weight == 0:
        return FeatureDataset(color, tuple(names))
    rows, cols = np.divmod(np.arange(h * w), w)
    x = cols / (w - 1) if w > 1 else np.zeros(h * w)
    y = rows / (h - 1) if h > 1 else np.zeros(h * w)
    scale = spatial_weight * SPATIAL_SCALE
    pts = np.column_stack([color, scale * x, scale * y])
    return FeatureDataset(pts, tuple(names + ["X", "Y"]))


def read_csv_table(text: str):
    """Parse CSV text into ``(header, rows)`` of raw strings, checking raggedness."""
    reader = csv.reader(io.StringIO(text))
    header, rows = None, []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if header is None:
            header = [cell.strip() for cell in row]
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", line)
        rows.append((line, row))
    if header is None:
        raise ParseError("missing header row", 1)
    return header, rows


def csv_to_dataset(text: str) -> FeatureDataset:
    """Numeric CSV with a header row.  A trailing ``label`` column becomes
    ``reference_labels`` and is not used as a feature."""
    header, rows = read_csv_table(text)
    has_label = len(header) > 1 and header[-1].lower() == "label"
    names = header[:-1] if has_label else header
    if not rows:
        raise ParseError("no data rows", 2)
    values, labels = [], []
    for line, row in rows:
        try:
            values.append([float(cell) for cell in row[:len(names)]])
        except ValueError as exc:
            raise ParseError(f"non-numeric value ({exc})", line) from None
        if has_label:
            labels.append(row[-1].strip())
    pts = np.array(values, dtype=np.float64)
    if not np.all(np.isfinite(pts)):
        raise ParseError("non-finite value in data")
    ref = None
    if has_label:
        try:
            ref = np.array([int(v) for v in labels])
        except ValueError:
            ref = np.array(labels)
    return FeatureDataset(pts, tuple(names), ref)
