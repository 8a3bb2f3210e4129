"""Lloyd's k-means with k-means++ seeding, and projection of key-points onto a grid."""

from dataclasses import dataclass, field

import numpy as np

from gridvec import kernels

# 1-D Lloyd runs stall in poor local optima often enough that one run is not enough
PROJECT_RESTARTS = 20


@dataclass
class ClusterResult:
    centers: np.ndarray      # (k, D)
    assignment: np.ndarray   # (N,) center index per input
    inertia: float
    n_iter: int = 0
    inertia_history: list = field(default_factory=list)


def _sq_dists(points, centers):
    return ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _kmeans_pp(points, k, rng, trials=None):
    """Greedy k-means++: each new center is the best of ``trials`` D^2 samples."""
    n = len(points)
    trials = trials or 2 + int(np.log(k))
    centers = [points[rng.integers(n)]]
    closest = ((points - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            cum = np.cumsum(closest)
            cand = np.minimum(np.searchsorted(cum, rng.random(trials) * cum[-1], side="right"),
                              n - 1)
        else:
            cand = rng.integers(n, size=trials)
        d2 = ((points[None, :, :] - points[cand][:, None, :]) ** 2).sum(axis=2)
        pots = np.minimum(closest[None, :], d2)
        best = int(np.argmin(pots.sum(axis=1)))
        centers.append(points[cand[best]])
        closest = pots[best]
    return np.array(centers, dtype=np.float64)


def _repair_empty(points, centers, assignment, d2):
    counts = np.bincount(assignment, minlength=len(centers))
    for j in np.flatnonzero(counts == 0):
        own = d2[np.arange(len(points)), assignment]
        # never strip the last member of another cluster
        donors = counts[assignment] > 1
        own = np.where(donors, own, -1.0)
        far = int(np.argmax(own))
        counts[assignment[far]] -= 1
        assignment[far] = j
        counts[j] = 1
        centers[j] = points[far]
        d2 = _sq_dists(points, centers)
    return assignment


def _finish(pts, centers, n_iter, history):
    d2 = _sq_dists(pts, centers)
    assignment = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(len(pts)), assignment].sum())
    history.append(inertia)
    return ClusterResult(centers, assignment, inertia, n_iter, history)


def _lloyd(pts, k, rng, max_iter, tol):
    centers = _kmeans_pp(pts, k, rng)
    if pts.shape[1] == 1:
        c, n_iter, history, ok = kernels.lloyd_1d(np.ascontiguousarray(pts[:, 0]),
                                                 centers[:, 0].copy(), max_iter, tol)
        if ok:
            return _finish(pts, np.asarray(c)[:, None], n_iter, list(history))
    rows = np.arange(len(pts))
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = _sq_dists(pts, centers)
        assignment = np.argmin(d2, axis=1)
        counts = np.bincount(assignment, minlength=k)
        if not counts.all():
            assignment = _repair_empty(pts, centers, assignment, d2)
            d2 = _sq_dists(pts, centers)
            counts = np.bincount(assignment, minlength=k)
        history.append(float(d2[rows, assignment].sum()))
        new = np.column_stack([np.bincount(assignment, weights=pts[:, j], minlength=k)
                               for j in range(pts.shape[1])]) / counts[:, None]
        shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        if shift < tol:
            break
    return _finish(pts, centers, n_iter, history)


def kmeans(points, k: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-6,
           n_init: int = 1) -> ClusterResult:
    """Lloyd's algorithm from greedy k-means++ seeds.

    With ``n_init > 1`` the run is repeated from fresh seeds drawn from the
    same generator and the lowest-inertia result is kept (first one on ties).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) == 0:
        raise ValueError("kmeans needs at least one point")
    if not 1 <= k <= len(pts):
        raise ValueError(f"k={k} out of range for {len(pts)} points")
    if n_init < 1:
        raise ValueError("n_init must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        res = _lloyd(pts, k, rng, max_iter, tol)
        if best is None or res.inertia < best.inertia:
            best = res
    return best


def project_grid(keypoints, rows: int = 5, cols: int = 5, seed: int = 0,
                 n_init: int = PROJECT_RESTARTS) -> np.ndarray:
    """Cluster x and y separately and take the Cartesian product of sorted centers.

    Returns a (rows*cols, 2) array of (x, y) node coordinates in row-major order.
    """
    if len(keypoints) < max(rows, cols):
        raise ValueError(f"need at least {max(rows, cols)} key-points, got {len(keypoints)}")
    xs = np.array([kp.x for kp in keypoints], dtype=np.float64)
    ys = np.array([kp.y for kp in keypoints], dtype=np.float64)
    cx = np.sort(kmeans(xs, cols, seed=seed, n_init=n_init).centers[:, 0])
    cy = np.sort(kmeans(ys, rows, seed=seed + 1, n_init=n_init).centers[:, 0])
    gx, gy = np.meshgrid(cx, cy)
    return np.column_stack([gx.ravel(), gy.ravel()])
