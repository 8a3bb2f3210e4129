"""Raster decoding (PPM/PGM, CIFAR-10 binary), grayscale conversion, resizing."""

from dataclasses import dataclass

import numpy as np

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
CIFAR_RECORD = 3073


class FormatError(ValueError):
    """Raised when an input file does not match its declared format."""


@dataclass(frozen=True)
class Image:
    """8-bit raster. ``pixels`` has shape (height, width, channels)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.dtype != np.uint8 or p.ndim != 3 or p.shape[2] not in (1, 3):
            raise ValueError("pixels must be uint8 with shape (h, w, 1|3)")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("image must be at least 1x1")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


@dataclass(frozen=True)
class GrayImage:
    """Luminance raster with values in [0, 1], shape (height, width)."""

    values: np.ndarray

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _read_header(data: bytes, fields: int):
    """Split ``fields`` whitespace-delimited tokens off the front of ``data``."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < fields:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated header")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos:pos + 1].isspace():
        raise FormatError("header must end with a single whitespace byte")
    return tokens, pos + 1


def load_ppm(data: bytes) -> Image:
    """Decode a binary PPM (P6) or PGM (P5) file with maxval 255."""
    if data[:2] not in (b"P5", b"P6"):
        raise FormatError("expected P5 or P6 magic")
    tokens, offset = _read_header(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError(f"malformed header: {exc}") from None
    if width < 1 or height < 1:
        raise FormatError("non-positive image dimensions")
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}")
    channels = 3 if tokens[0] == b"P6" else 1
    size = width * height * channels
    payload = data[offset:offset + size]
    if len(payload) < size:
        raise FormatError(f"truncated payload: {len(payload)} of {size} bytes")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return Image(pixels.copy())


def write_ppm(image: Image) -> bytes:
    magic = b"P6" if image.channels == 3 else b"P5"
    header = b"%s %d %d 255\n" % (magic, image.width, image.height)
    return header + image.pixels.tobytes()


def load_cifar10_batch(data: bytes):
    """Decode a CIFAR-10 binary batch into ``[(label, Image), ...]``."""
    if len(data) % CIFAR_RECORD:
        raise FormatError(f"length {len(data)} is not a multiple of {CIFAR_RECORD}")
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
    labels = raw[:, 0]
    if labels.size and labels.max() > 9:
        raise FormatError(f"label byte {int(labels.max())} out of range")
    planes = raw[:, 1:].reshape(-1, 3, 32, 32).transpose(0, 2, 3, 1)
    return [(int(lab), Image(np.ascontiguousarray(img))) for lab, img in zip(labels, planes)]


def write_cifar10_batch(records) -> bytes:
    out = bytearray()
    for label, image in records:
        out.append(label)
        out += image.pixels.transpose(2, 0, 1).tobytes()
    return bytes(out)


def to_gray(image: Image) -> GrayImage:
    p = image.pixels.astype(np.float64)
    if image.channels == 1:
        values = p[:, :, 0] / 255.0
    elif image.channels == 3:
        r, g, b = LUMA_WEIGHTS
        values = (r * p[:, :, 0] + g * p[:, :, 1] + b * p[:, :, 2]) / 255.0
    else:
        raise ValueError(f"unsupported channel count {image.channels}")
    return GrayImage(np.clip(values, 0.0, 1.0))


def _sample_axis(old: int, new: int):
    scale = old / new
    src = (np.arange(new) + 0.5) * scale - 0.5
    src = np.clip(src, 0.0, old - 1)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, old - 1)
    return lo, hi, src - lo


def resize_bilinear(image, new_width: int, new_height: int):
    """Bilinear resize with half-pixel centers; accepts Image or GrayImage."""
    if new_width < 1 or new_height < 1:
        raise ValueError("target dimensions must be >= 1")
    is_gray = isinstance(image, GrayImage)
    arr = image.values[:, :, None] if is_gray else image.pixels.astype(np.float64)
    y0, y1, fy = _sample_axis(arr.shape[0], new_height)
    x0, x1, fx = _sample_axis(arr.shape[1], new_width)
    fy = fy[:, None, None]
    fx = fx[None, :, None]
    top = arr[y0][:, x0] * (1 - fx) + arr[y0][:, x1] * fx
    bottom = arr[y1][:, x0] * (1 - fx) + arr[y1][:, x1] * fx
    out = top * (1 - fy) + bottom * fy
    if is_gray:
        return GrayImage(out[:, :, 0])
    return Image(np.clip(np.rint(out), 0, 255).astype(np.uint8))
