"""Pure numpy fallbacks for the suppression kernels.

Mirrors the compiled kernels in `_kernels.pyx` operation for operation so
both backends produce the same kept sets. min/max/mul/div arithmetic is
bit-identical; the gaussian decay goes through numpy's vectorized exp, which
may differ from libm by one unit in the last place.
"""

import numpy as np

METHOD_LINEAR = 0
METHOD_GAUSSIAN = 1


def _iou_one_vs_many(corners, areas, i, idx):
    left = np.maximum(corners[i, 0], corners[idx, 0])
    top = np.maximum(corners[i, 1], corners[idx, 1])
    right = np.minimum(corners[i, 2], corners[idx, 2])
    bottom = np.minimum(corners[i, 3], corners[idx, 3])
    iw = np.maximum(right - left, 0.0)
    ih = np.maximum(bottom - top, 0.0)
    # cap at the smaller box so duplicated boxes cannot score above 1
    inter = np.minimum(iw * ih, np.minimum(areas[i], areas[idx]))
    return inter / (areas[i] + areas[idx] - inter)


def greedy_nms(corners, areas, order, threshold):
    """Greedy sweep in `order`: each surviving box removes later boxes with IoU > threshold.

    Returns the kept original indices in visit order.
    """
    kept = []
    remaining = order
    while remaining.size:
        i = int(remaining[0])
        kept.append(i)
        rest = remaining[1:]
        if rest.size == 0:
            break
        overlap = _iou_one_vs_many(corners, areas, i, rest)
        remaining = rest[overlap <= threshold]
    return np.asarray(kept, dtype=np.int64)


def soft_rescore(corners, areas, scores, method, sigma):
    """Visit every box in descending rescored order, decaying the not-yet-visited scores.

    The decay factor is (1 - iou) for the linear method and exp(-iou^2 / sigma)
    for the gaussian method. Returns the full rescored array.
    """
    n = scores.shape[0]
    rescored = scores.copy()
    unvisited = np.ones(n, dtype=bool)
    for _ in range(n):
        candidates = np.flatnonzero(unvisited)
        visit = int(candidates[np.argmax(rescored[candidates])])
        unvisited[visit] = False
        rest = candidates[candidates != visit]
        if rest.size == 0:
            break
        overlap = _iou_one_vs_many(corners, areas, visit, rest)
        if method == METHOD_LINEAR:
            rescored[rest] *= 1.0 - overlap
        elif method == METHOD_GAUSSIAN:
            rescored[rest] *= np.exp(-(overlap * overlap) / sigma)
        else:
            raise ValueError(f"unknown decay method id {method}")
    return rescored


def cell_max_indices(keys, scores):
    """Index of the highest-scoring box per distinct key, earliest index on ties.

    Sort-based equivalent of the sequential one-pass map update; returns the
    kept original indices in ascending order. The stable key sort keeps equal
    keys in original-index order, so the first per-segment maximum is the
    earliest-index winner.
    """
    n = keys.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    sorted_scores = scores[order]
    head = np.empty(n, dtype=bool)
    head[0] = True
    head[1:] = sorted_keys[1:] != sorted_keys[:-1]
    starts = np.flatnonzero(head)
    segment_max = np.maximum.reduceat(sorted_scores, starts)
    segment_id = np.cumsum(head) - 1
    max_positions = np.flatnonzero(sorted_scores == segment_max[segment_id])
    first = max_positions[np.unique(segment_id[max_positions], return_index=True)[1]]
    kept = order[first]
    kept.sort()
    return kept.astype(np.int64, copy=False)


def cell_max_reference(keys, scores):
    """Sequential dict-based per-cell argmax with operation counters.

    Verification aid: one key lookup per box and at most one map update per
    box, exactly the one-pass semantics the production kernels must match.
    Returns (kept ascending, lookups, updates).
    """
    best: dict[int, int] = {}
    lookups = 0
    updates = 0
    for idx in range(len(keys)):
        key = int(keys[idx])
        lookups += 1
        prev = best.get(key)
        if prev is None or scores[idx] > scores[prev]:
            best[key] = idx
            updates += 1
    kept = np.array(sorted(best.values()), dtype=np.int64)
    return kept, lookups, updates
