"""Pure numpy versions of the pixel-loop kernels.

Used when the compiled extension is unavailable, or forced with
``GRIDVEC_BACKEND=python``. Results are bit-identical to the compiled
versions for ``fast_scores`` and ``nonmax_suppress``.
"""

import numpy as np

CIRCLE_DX = (0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1)
CIRCLE_DY = (-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3)


def _covered(member, arc):
    # union of every qualifying length-`arc` window equals the union of
    # maximal runs of length >= arc
    cov = np.zeros_like(member)
    for start in range(16):
        win = member[start].copy()
        for j in range(1, arc):
            win &= member[(start + j) % 16]
        for j in range(arc):
            cov[(start + j) % 16] |= win
    return cov


def fast_scores(img, threshold, arc):
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.float64)
    if h < 7 or w < 7:
        return out
    c = img[3:h - 3, 3:w - 3]
    hi = c + threshold
    lo = c - threshold
    ring = np.stack([img[3 + dy:h - 3 + dy, 3 + dx:w - 3 + dx]
                     for dx, dy in zip(CIRCLE_DX, CIRCLE_DY)])
    diff = np.abs(ring - c)
    cov = _covered(ring > hi, arc) | _covered(ring < lo, arc)
    s = np.zeros_like(c)
    for k in range(16):
        s = s + np.where(cov[k], diff[k], 0.0)
    out[3:h - 3, 3:w - 3] = np.where(cov.any(axis=0), s, 0.0)
    return out


def nonmax_suppress(score):
    h, w = score.shape
    padded = np.full((h + 2, w + 2), -np.inf)
    padded[1:-1, 1:-1] = score
    neigh = np.max(np.stack([padded[1 + dy:h + 1 + dy, 1 + dx:w + 1 + dx]
                             for dy in (-1, 0, 1) for dx in (-1, 0, 1)]), axis=0)
    return (score > 0.0) & (score >= neigh)


def hog_cells(patch, cell, orientations):
    h, w = patch.shape
    gx = np.zeros_like(patch)
    gy = np.zeros_like(patch)
    gx[:, 1:-1] = patch[:, 2:] - patch[:, :-2]
    gy[1:-1, :] = patch[2:, :] - patch[:-2, :]
    mag = np.sqrt(gx * gx + gy * gy)
    ang = np.arctan2(gy, gx)
    ang = np.where(ang < 0.0, ang + np.pi, ang)
    ang = np.where(ang >= np.pi, ang - np.pi, ang)
    pos = ang / (np.pi / orientations)
    lo = np.floor(pos)
    frac = pos - lo
    lo = lo.astype(np.int64) % orientations
    hi = (lo + 1) % orientations
    ys, xs = np.indices((h, w))
    flat = ((ys // cell) * (w // cell) + xs // cell) * orientations
    hist = np.zeros((h // cell) * (w // cell) * orientations)
    voting = mag > 0.0
    np.add.at(hist, (flat + lo)[voting], (mag * (1.0 - frac))[voting])
    np.add.at(hist, (flat + hi)[voting], (mag * frac)[voting])
    return hist.reshape(h // cell, w // cell, orientations)


def lloyd_1d(x, init, max_iter, tol):
    """Lloyd iterations on scalars. Returns (centers, n_iter, history, ok)."""
    c = np.array(init, dtype=np.float64)
    k = len(c)
    history = []
    it = 0
    while it < max_iter:
        it += 1
        d2 = (x[:, None] - c[None, :]) * (x[:, None] - c[None, :])
        assign = np.argmin(d2, axis=1)
        counts = np.bincount(assign, minlength=k)
        if not counts.all():
            return c, it, history, False
        history.append(float(d2[np.arange(len(x)), assign].sum()))
        new = np.bincount(assign, weights=x, minlength=k) / counts
        shift = np.abs(new - c).max()
        c = new
        if shift < tol:
            break
    return c, it, history, True
