"""Patch slicing, per-patch descriptors and the FGV1 feature-matrix format."""

import struct

import numpy as np

from gridvec import kernels
from gridvec.ingest import FormatError, GrayImage, Image, to_gray

FGV1_MAGIC = b"FGV1"
_HEADER = struct.Struct("<4sII")
HOG_EPS = 1e-6


def _as_array(image):
    if isinstance(image, GrayImage):
        return image.values
    if isinstance(image, Image):
        return image.pixels
    return np.asarray(image)


def patch_origin(center, width, height, side):
    """Top-left corner of a ``side`` window centred on ``center``, clamped inside."""
    cx = int(np.floor(center[0] + 0.5))
    cy = int(np.floor(center[1] + 0.5))
    x0 = min(max(cx - side // 2, 0), width - side)
    y0 = min(max(cy - side // 2, 0), height - side)
    return x0, y0


def extract_patch(image, center, side: int = 32):
    """Crop a side x side window around ``center``; returns the same kind as ``image``."""
    arr = _as_array(image)
    h, w = arr.shape[:2]
    if h < side or w < side:
        raise ValueError(f"{w}x{h} image is smaller than a {side}px patch")
    x0, y0 = patch_origin(center, w, h, side)
    crop = arr[y0:y0 + side, x0:x0 + side]
    if isinstance(image, GrayImage):
        return GrayImage(crop)
    if isinstance(image, Image):
        return Image(np.ascontiguousarray(crop))
    return crop


def color_histogram(patch: Image, bins: int = 8) -> np.ndarray:
    """Joint RGB histogram with ``bins`` levels per channel, L1-normalized."""
    if not isinstance(patch, Image) or patch.channels != 3:
        raise ValueError("color histogram needs a 3-channel patch")
    idx = np.minimum(patch.pixels.astype(np.int64) * bins // 256, bins - 1)
    joint = (idx[..., 0] * bins + idx[..., 1]) * bins + idx[..., 2]
    counts = np.bincount(joint.ravel(), minlength=bins ** 3).astype(np.float64)
    return counts / counts.sum()


def hog(patch, cell: int = 8, orientations: int = 9) -> np.ndarray:
    """HOG over 2x2-cell blocks with one-cell stride, L2-normalized per block."""
    gray = to_gray(patch) if isinstance(patch, Image) else patch
    values = gray.values if isinstance(gray, GrayImage) else np.asarray(gray, dtype=np.float64)
    h, w = values.shape
    if h % cell or w % cell:
        raise ValueError(f"patch {w}x{h} is not divisible into {cell}px cells")
    cells = kernels.hog_cells(np.ascontiguousarray(values, dtype=np.float64), cell, orientations)
    ny, nx = cells.shape[:2]
    blocks = []
    for by in range(ny - 1):
        for bx in range(nx - 1):
            v = cells[by:by + 2, bx:bx + 2].ravel()
            blocks.append(v / np.sqrt(v @ v + HOG_EPS ** 2))
    if not blocks:
        return np.zeros(0)
    return np.concatenate(blocks)


EXTRACTORS = {
    "color_histogram": lambda p, params: color_histogram(p, **params),
    "hog": lambda p, params: hog(p, **params),
}


def feature_matrix(image, coords, extractor: str = "color_histogram", side: int = 32,
                   params: dict = None) -> np.ndarray:
    """One descriptor row per node coordinate, in node order."""
    try:
        fn = EXTRACTORS[extractor]
    except KeyError:
        raise ValueError(f"unknown extractor {extractor!r}") from None
    params = params or {}
    rows = [fn(extract_patch(image, c, side), params) for c in np.asarray(coords).reshape(-1, 2)]
    return np.vstack(rows)


def write_feature_file(matrix) -> bytes:
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError("feature matrix must be 2-D")
    if not np.all(np.isfinite(m)):
        raise ValueError("feature matrix contains non-finite values")
    n, d = m.shape
    return _HEADER.pack(FGV1_MAGIC, n, d) + m.astype("<f4").tobytes()


def read_feature_file(data: bytes, expected_rows: int = None) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise FormatError("truncated FGV1 header")
    magic, n, d = _HEADER.unpack_from(data)
    if magic != FGV1_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    size = n * d * 4
    payload = data[_HEADER.size:_HEADER.size + size]
    if len(payload) < size:
        raise FormatError(f"truncated FGV1 payload: {len(payload)} of {size} bytes")
    if expected_rows is not None and n != expected_rows:
        raise FormatError(f"FGV1 has {n} rows, graph has {expected_rows} nodes")
    return np.frombuffer(payload, dtype="<f4").reshape(n, d).astype(np.float32)
