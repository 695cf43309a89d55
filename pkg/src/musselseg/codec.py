"""Image files, segmentation rendering, JSON manifests and trace CSVs.

PPM (binary P6, maxval 255) is read and written here directly; PNG goes
through Pillow.  Manifests are written with sorted keys and floats at 17
significant digits so they are byte-stable and round-trip exactly.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import DecodeError, InvalidInputError

GRAY_LABELS = "gray-labels"
MEAN_COLOR = "mean-color"
RENDER_STYLES = (GRAY_LABELS, MEAN_COLOR)

_PPM_HEADER = re.compile(rb"P6(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s")


def encode_ppm(image) -> bytes:
    img = _check_rgb(image)
    h, w = img.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + img.tobytes()


def decode_ppm(data: bytes) -> np.ndarray:
    m = _PPM_HEADER.match(data)
    if m is None:
        raise DecodeError("not a binary PPM (P6) stream")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise DecodeError(f"only 8-bit PPM is supported, maxval={maxval}")
    body = data[m.end():]
    if w < 1 or h < 1 or len(body) < w * h * 3:
        raise DecodeError("truncated PPM pixel data")
    return np.frombuffer(body[:w * h * 3], dtype=np.uint8).reshape(h, w, 3).copy()


def decode_image(data: bytes) -> np.ndarray:
    """Decode PPM or PNG bytes to an H x W x 3 uint8 array."""
    if data[:2] == b"P6":
        return decode_ppm(data)
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.mode not in ("RGB", "RGBA", "L", "LA", "P", "1"):
                raise DecodeError(f"unsupported pixel layout {im.mode}")
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"cannot decode image: {exc}") from None


def encode_png(image) -> bytes:
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(_check_rgb(image), "RGB").save(buf, format="PNG")
    return buf.getvalue()


def read_image(path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DecodeError(f"{path}: {exc.strerror}") from None
    try:
        return decode_image(data)
    except DecodeError as exc:
        raise DecodeError(f"{path}: {exc}") from None


def write_image(path, image) -> None:
    """Write PNG, or PPM when the suffix is ``.ppm``/``.pnm``."""
    path = Path(path)
    data = encode_ppm(image) if path.suffix.lower() in (".ppm", ".pnm") else encode_png(image)
    _write_bytes(path, data)


def _check_rgb(image):
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise InvalidInputError(f"expected an H x W x 3 uint8 image, got {img.shape} {img.dtype}")
    return np.ascontiguousarray(img)


def _write_bytes(path, data: bytes):
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def digest_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def render_segmentation(shape, labels, source=None, style: str = GRAY_LABELS) -> np.ndarray:
    """Paint a label map as an RGB image.

    ``gray-labels`` gives cluster ``i`` of ``k`` the level ``round(255 i / (k - 1))``
    (128 for a single cluster); ``mean-color`` paints each pixel with its
    cluster's mean color in ``source``.
    """
    h, w = shape[:2]
    labels = np.asarray(labels)
    if labels.shape != (h * w,):
        raise InvalidInputError(f"{labels.size} labels for a {h} x {w} image")
    _, dense = np.unique(labels, return_inverse=True)
    dense = dense.reshape(-1)
    k = int(dense.max()) + 1
    if style == GRAY_LABELS:
        levels = np.full(k, 128, dtype=np.uint8) if k == 1 else \
            np.round(255.0 * np.arange(k) / (k - 1)).astype(np.uint8)
        out = np.repeat(levels[dense][:, None], 3, axis=1)
    elif style == MEAN_COLOR:
        if source is None:
            raise InvalidInputError("mean-color rendering needs the source image")
        src = _check_rgb(source).reshape(-1, 3).astype(np.float64)
        if src.shape[0] != h * w:
            raise InvalidInputError("source image size does not match the labels")
        counts = np.bincount(dense, minlength=k)
        means = np.stack([np.bincount(dense, weights=src[:, c], minlength=k) for c in range(3)], axis=1)
        out = np.round(means / counts[:, None]).astype(np.uint8)[dense]
    else:
        raise InvalidInputError(f"unknown render style {style!r}")
    return out.reshape(h, w, 3)


# -- manifests ---------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def _dump(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_dump(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_manifest(manifest: dict) -> str:
    return _dump(manifest, 2, 0) + "\n"


def loads_manifest(text: str) -> dict:
    return json.loads(text)


def build_manifest(result, *, feature_mode: str, spatial_weight: float, digest: str,
                   timing: bool = True) -> dict:
    """Manifest dictionary for a :class:`~musselseg.engine.ClusteringResult`.

    With ``timing=False`` the wall time is written as ``null`` so repeated
    runs produce identical bytes.
    """
    from dataclasses import asdict

    return {
        "centers": np.asarray(result.centers).tolist(),
        "config": asdict(result.config),
        "db": result.db,
        "db_orders": {"q_order": result.db_params.q_order, "t_order": result.db_params.t_order},
        "degenerate": result.degenerate,
        "features": {"mode": str(feature_mode), "spatial_weight": float(spatial_weight),
                     "xy_scale": "normalized to 0-255 times spatial_weight"},
        "input_digest": digest,
        "iterations": result.iterations,
        "k_eff": result.k_eff,
        "rf": result.rf,
        "seed": result.seed,
        "wall_ms": result.wall_ms if timing else None,
    }


def write_manifest(manifest: dict, path=None) -> str:
    text = dumps_manifest(manifest)
    if path is not None:
        _write_bytes(path, text.encode("utf-8"))
    return text


def read_manifest(path) -> dict:
    return loads_manifest(Path(path).read_text(encoding="utf-8"))


def config_from_manifest(manifest: dict):
    from .core import MwoConfig

    return MwoConfig(**manifest["config"])


# -- traces ------------------------------------------------------------------

TRACE_HEADER = "iteration,best_rf,best_db,best_k"


def write_trace(trace, path=None) -> str:
    records = list(trace)
    if not records:
        raise InvalidInputError("cannot write an empty trace")
    lines = [TRACE_HEADER]
    lines += [f"{r.iteration},{_fmt_csv(r.best_rf)},{_fmt_csv(r.best_db)},{r.best_k}" for r in records]
    text = "\n".join(lines) + "\n"
    if path is not None:
        _write_bytes(path, text.encode("utf-8"))
    return text


def _fmt_csv(x: float) -> str:
    return "inf" if math.isinf(x) else format(x, ".17g")


def read_trace(text: str):
    from .engine import ConvergenceTrace, TraceRecord

    lines = text.strip().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise InvalidInputError("not a trace file")
    recs = []
    for line in lines[1:]:
        it, rf, db, k = line.split(",")
        recs.append(TraceRecord(int(it), float(rf), float(db), int(k)))
    return ConvergenceTrace(tuple(recs))
