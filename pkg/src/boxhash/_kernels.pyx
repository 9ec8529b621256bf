# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled suppression kernels: greedy NMS sweep, score-decay sweep, per-cell argmax.

Drop-in replacements for `_pykernels`; selected by `backends` when built.
"""

import numpy as np

cimport numpy as cnp
from cython.operator cimport dereference as deref
from cython.operator cimport preincrement as inc
from libc.math cimport exp
from libc.stdint cimport int64_t, uint64_t
from libcpp.unordered_map cimport unordered_map

cnp.import_array()


cdef inline double _pair_iou(const double[:, ::1] corners, const double[::1] areas,
                             Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double left = corners[i, 0] if corners[i, 0] > corners[j, 0] else corners[j, 0]
    cdef double top = corners[i, 1] if corners[i, 1] > corners[j, 1] else corners[j, 1]
    cdef double right = corners[i, 2] if corners[i, 2] < corners[j, 2] else corners[j, 2]
    cdef double bottom = corners[i, 3] if corners[i, 3] < corners[j, 3] else corners[j, 3]
    cdef double iw = right - left
    cdef double ih = bottom - top
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    # cap at the smaller box so duplicated boxes cannot score above 1
    cdef double inter = iw * ih
    cdef double cap = areas[i] if areas[i] < areas[j] else areas[j]
    if inter > cap:
        inter = cap
    return inter / (areas[i] + areas[j] - inter)


def greedy_nms(const double[:, ::1] corners, const double[::1] areas,
               const int64_t[::1] order, double threshold):
    """Greedy sweep in `order`: each surviving box removes later boxes with IoU > threshold."""
    cdef Py_ssize_t n = order.shape[0]
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] kept = out
    flags = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] suppressed = flags
    cdef Py_ssize_t a, b, n_kept = 0
    cdef int64_t i
    with nogil:
        for a in range(n):
            if suppressed[a]:
                continue
            i = order[a]
            kept[n_kept] = i
            n_kept += 1
            for b in range(a + 1, n):
                if suppressed[b]:
                    continue
                if _pair_iou(corners, areas, i, order[b]) > threshold:
                    suppressed[b] = 1
    return out[:n_kept].copy()


def soft_rescore(const double[:, ::1] corners, const double[::1] areas,
                 const double[::1] scores, int method, double sigma):
    """Visit every box in descending rescored order, decaying the not-yet-visited scores."""
    cdef Py_ssize_t n = scores.shape[0]
    out = np.array(scores, dtype=np.float64, copy=True)
    cdef double[::1] rescored = out
    flags = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] visited = flags
    cdef Py_ssize_t step, i, j, visit
    cdef double best, overlap
    with nogil:
        for step in range(n):
            visit = -1
            best = -1.0
            for i in range(n):
                if not visited[i] and rescored[i] > best:
                    best = rescored[i]
                    visit = i
            if visit < 0:
                break
            visited[visit] = 1
            for j in range(n):
                if visited[j]:
                    continue
                overlap = _pair_iou(corners, areas, visit, j)
                if method == 0:
                    rescored[j] *= 1.0 - overlap
                else:
                    rescored[j] *= exp(-(overlap * overlap) / sigma)
    return out


def cell_max_indices(const uint64_t[::1] keys, const double[::1] scores):
    """Index of the highest-scoring box per distinct key, earliest index on ties."""
    cdef Py_ssize_t n = keys.shape[0]
    cdef unordered_map[uint64_t, int64_t] best
    cdef unordered_map[uint64_t, int64_t].iterator it
    cdef Py_ssize_t i
    best.reserve(n)
    for i in range(n):
        it = best.find(keys[i])
        if it == best.end():
            best[keys[i]] = i
        elif scores[i] > scores[deref(it).second]:
            deref(it).second = i
    out = np.empty(best.size(), dtype=np.int64)
    cdef int64_t[::1] kept = out
    cdef Py_ssize_t n_kept = 0
    it = best.begin()
    while it != best.end():
        kept[n_kept] = deref(it).second
        n_kept += 1
        inc(it)
    out.sort()
    return out
