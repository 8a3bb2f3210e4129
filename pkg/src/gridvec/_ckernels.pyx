# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pixel-loop kernels. Semantics mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, atan2, floor, M_PI

cnp.import_array()

cdef int CIRCLE_DX[16]
cdef int CIRCLE_DY[16]
CIRCLE_DX[:] = [0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1]
CIRCLE_DY[:] = [-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3]


cdef inline void _mark_runs(int* state, int sign, int arc, int* covered) noexcept nogil:
    cdef int count = 0, k, start = -1, i, pos, run_start, run_len
    for k in range(16):
        if state[k] == sign:
            count += 1
    if count < arc:
        return
    if count == 16:
        for k in range(16):
            covered[k] = 1
        return
    # begin scanning just after a non-member so runs never wrap the scan start
    for k in range(16):
        if state[k] != sign:
            start = k
            break
    run_len = 0
    run_start = 0
    for i in range(1, 17):
        pos = (start + i) % 16
        if i < 16 and state[pos] == sign:
            if run_len == 0:
                run_start = i
            run_len += 1
        else:
            if run_len >= arc:
                for k in range(run_start, run_start + run_len):
                    covered[(start + k) % 16] = 1
            run_len = 0


def fast_scores(double[:, ::1] img, double threshold, int arc):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    out = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] score = out
    cdef int state[16]
    cdef int covered[16]
    cdef double diff[16]
    cdef Py_ssize_t x, y
    cdef int k, any_cov
    cdef double c, hi, lo, v, s
    with nogil:
        for y in range(3, h - 3):
            for x in range(3, w - 3):
                c = img[y, x]
                hi = c + threshold
                lo = c - threshold
                for k in range(16):
                    v = img[y + CIRCLE_DY[k], x + CIRCLE_DX[k]]
                    diff[k] = fabs(v - c)
                    covered[k] = 0
                    if v > hi:
                        state[k] = 1
                    elif v < lo:
                        state[k] = -1
                    else:
                        state[k] = 0
                _mark_runs(state, 1, arc, covered)
                _mark_runs(state, -1, arc, covered)
                any_cov = 0
                s = 0.0
                for k in range(16):
                    if covered[k]:
                        any_cov = 1
                        s = s + diff[k]
                if any_cov:
                    score[y, x] = s
    return out


def nonmax_suppress(double[:, ::1] score):
    cdef Py_ssize_t h = score.shape[0], w = score.shape[1]
    keep_arr = np.zeros((h, w), dtype=np.bool_)
    cdef cnp.npy_bool[:, ::1] keep = keep_arr
    cdef Py_ssize_t x, y, yy, xx
    cdef double s
    cdef int ok
    with nogil:
        for y in range(h):
            for x in range(w):
                s = score[y, x]
                if s <= 0.0:
                    continue
                ok = 1
                for yy in range(max(y - 1, 0), min(y + 2, h)):
                    for xx in range(max(x - 1, 0), min(x + 2, w)):
                        if score[yy, xx] > s:
                            ok = 0
                if ok:
                    keep[y, x] = 1
    return keep_arr


def hog_cells(double[:, ::1] patch, int cell, int orientations):
    cdef Py_ssize_t h = patch.shape[0], w = patch.shape[1]
    out = np.zeros((h // cell, w // cell, orientations), dtype=np.float64)
    cdef double[:, :, ::1] hist = out
    cdef Py_ssize_t x, y
    cdef double gx, gy, mag, ang, pos, frac
    cdef double width = M_PI / orientations
    cdef int lo, hi
    with nogil:
        for y in range(h):
            for x in range(w):
                if 0 < x < w - 1:
                    gx = patch[y, x + 1] - patch[y, x - 1]
                else:
                    gx = 0.0
                if 0 < y < h - 1:
                    gy = patch[y + 1, x] - patch[y - 1, x]
                else:
                    gy = 0.0
                mag = sqrt(gx * gx + gy * gy)
                if mag == 0.0:
                    continue
                ang = atan2(gy, gx)
                if ang < 0.0:
                    ang = ang + M_PI
                if ang >= M_PI:
                    ang = ang - M_PI
                pos = ang / width
                lo = <int>floor(pos)
                frac = pos - lo
                lo = lo % orientations
                hi = (lo + 1) % orientations
                hist[y // cell, x // cell, lo] += mag * (1.0 - frac)
                hist[y // cell, x // cell, hi] += mag * frac
    return out


def lloyd_1d(double[::1] x, double[::1] init, int max_iter, double tol):
    """Lloyd iterations on scalars. Returns (centers, n_iter, history, ok).

    ``ok`` is False when a cluster empties; the caller then redoes the run
    with the general path, which knows how to repair it.
    """
    cdef Py_ssize_t n = x.shape[0], k = init.shape[0], i, j, best
    centers_arr = np.array(init, dtype=np.float64)
    cdef double[::1] c = centers_arr
    sums_arr = np.zeros(k)
    counts_arr = np.zeros(k, dtype=np.intp)
    cdef double[::1] sums = sums_arr
    cdef Py_ssize_t[::1] counts = counts_arr
    cdef double d, bd, cost, shift, m
    cdef int it = 0
    history = []
    while it < max_iter:
        it += 1
        cost = 0.0
        for j in range(k):
            sums[j] = 0.0
            counts[j] = 0
        for i in range(n):
            best = 0
            bd = (x[i] - c[0]) * (x[i] - c[0])
            for j in range(1, k):
                d = (x[i] - c[j]) * (x[i] - c[j])
                if d < bd:
                    bd = d
                    best = j
            cost += bd
            sums[best] += x[i]
            counts[best] += 1
        for j in range(k):
            if counts[j] == 0:
                return centers_arr, it, history, False
        history.append(cost)
        shift = 0.0
        for j in range(k):
            m = sums[j] / counts[j]
            d = fabs(m - c[j])
            if d > shift:
                shift = d
            c[j] = m
        if shift < tol:
            break
    return centers_arr, it, history, True
