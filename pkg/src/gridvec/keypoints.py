"""Corner detection, intensity-centroid orientation and key-point selection."""

import math
from dataclasses import dataclass, replace

import numpy as np

from gridvec import kernels
from gridvec.ingest import GrayImage

DEFAULT_THRESHOLD = 20 / 255
DEFAULT_ARC = 9
DEFAULT_TARGET = 250
DEFAULT_MOMENT_RADIUS = 3


@dataclass(frozen=True)
class Moments:
    m00: float
    m10: float
    m01: float

    @property
    def centroid(self):
        if self.m00 == 0:
            return (0.0, 0.0)
        return (self.m10 / self.m00, self.m01 / self.m00)

    @property
    def orientation(self) -> float:
        if self.m10 == 0 and self.m01 == 0:
            return 0.0
        return math.atan2(self.m01, self.m10)


@dataclass(frozen=True)
class KeyPoint:
    x: int
    y: int
    score: float = 0.0
    orientation: float = 0.0


def fast_detect(gray: GrayImage, threshold: float = DEFAULT_THRESHOLD,
                arc: int = DEFAULT_ARC) -> list:
    """Segment-test corners on the radius-3 circle, after 3x3 non-max suppression.

    The score of a corner is the summed absolute intensity difference over
    every circle pixel that belongs to a qualifying contiguous arc. Returned
    in raster order, unoriented.
    """
    if gray.height < 7 or gray.width < 7:
        raise ValueError("image must be at least 7x7 for corner detection")
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    if not 1 <= arc <= 16:
        raise ValueError("arc must lie in [1, 16]")
    img = np.ascontiguousarray(gray.values, dtype=np.float64)
    scores = kernels.fast_scores(img, float(threshold), int(arc))
    keep = kernels.nonmax_suppress(scores)
    ys, xs = np.nonzero(keep)
    return [KeyPoint(int(x), int(y), float(scores[y, x])) for y, x in zip(ys, xs)]


def circle_offsets(radius: int):
    """Integer (dx, dy) offsets with dx^2 + dy^2 <= radius^2."""
    r = int(radius)
    dy, dx = np.mgrid[-r:r + 1, -r:r + 1]
    inside = dx * dx + dy * dy <= r * r
    return dx[inside], dy[inside]


def patch_moments(gray: GrayImage, center, radius: int = DEFAULT_MOMENT_RADIUS) -> Moments:
    cx, cy = int(center[0]), int(center[1])
    r = int(radius)
    if cx - r < 0 or cy - r < 0 or cx + r >= gray.width or cy + r >= gray.height:
        raise ValueError(f"moment window of radius {r} at ({cx}, {cy}) leaves the image")
    dx, dy = circle_offsets(r)
    vals = gray.values[cy + dy, cx + dx]
    return Moments(float(vals.sum()), float((dx * vals).sum()), float((dy * vals).sum()))


def orient(gray: GrayImage, points, radius: int = DEFAULT_MOMENT_RADIUS) -> list:
    """Attach intensity-centroid orientation to each point whose window fits."""
    out = []
    for kp in points:
        try:
            theta = patch_moments(gray, (kp.x, kp.y), radius).orientation
        except ValueError:
            theta = 0.0
        out.append(replace(kp, orientation=theta))
    return out


def _interior(width, height, margin):
    x_lo, x_hi = margin, width - 1 - margin
    y_lo, y_hi = margin, height - 1 - margin
    if x_lo > x_hi or y_lo > y_hi:
        raise ValueError(f"margin {margin} leaves no interior in a {width}x{height} image")
    return x_lo, x_hi, y_lo, y_hi


def select_keypoints(detections, width: int, height: int, margin: int,
                     target: int = DEFAULT_TARGET, seed: int = 0) -> list:
    """Keep the strongest ``target`` detections; top up with random interior pixels."""
    x_lo, x_hi, y_lo, y_hi = _interior(width, height, margin)
    valid = [kp for kp in detections if x_lo <= kp.x <= x_hi and y_lo <= kp.y <= y_hi]
    valid.sort(key=lambda kp: (-kp.score, kp.y, kp.x))
    chosen = valid[:target]
    missing = target - len(chosen)
    if missing <= 0:
        return chosen

    iw, ih = x_hi - x_lo + 1, y_hi - y_lo + 1
    taken = np.zeros(iw * ih, dtype=bool)
    for kp in chosen:
        taken[(kp.y - y_lo) * iw + (kp.x - x_lo)] = True
    free = np.flatnonzero(~taken)
    if free.size < missing:
        raise ValueError(f"interior holds {free.size} free pixels, {missing} needed")
    rng = np.random.default_rng(seed)
    picks = rng.choice(free, size=missing, replace=False)
    chosen.extend(KeyPoint(int(x_lo + p % iw), int(y_lo + p // iw)) for p in picks)
    return chosen
