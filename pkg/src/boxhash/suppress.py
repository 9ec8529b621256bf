"""Suppression algorithms over one image's detections.

* `nms` / `nms_naive`: exact greedy suppression; the naive variant is an
  independently written quadratic reference used as the agreement oracle.
* `soft_nms`: score decay instead of removal.
* `hnms`: one box kept per hash cell, linear time.
* `multi_hnms`: chained hash passes with staggered cell boundaries.
* `prefilter_pipeline`: hash passes first, exact (soft) suppression on the
  survivors.

Every function is a pure function of its inputs; kept indices are returned
ascending.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import backends
from .geometry import boxes_to_corners
from .hashing import HashParams, hash_boxes, hash_family, pack_rows

__all__ = [
    "Detections",
    "KeepResult",
    "PipelineResult",
    "nms",
    "nms_naive",
    "soft_nms",
    "hnms",
    "multi_hnms",
    "prefilter_pipeline",
]

_SOFT_METHODS = {"linear": 0, "gaussian": 1}


@dataclass(frozen=True)
class Detections:
    """Parallel arrays: (N, 4) float64 box rows (w, h, cx, cy) and (N,) scores in [0, 1]."""

    boxes: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        boxes = np.ascontiguousarray(self.boxes, dtype=np.float64)
        scores = np.ascontiguousarray(self.scores, dtype=np.float64)
        if boxes.size == 0:
            boxes = boxes.reshape(0, 4)
        if boxes.ndim != 2 or boxes.shape[1] != 4:
            raise ValueError(f"boxes must have shape (N, 4), got {boxes.shape}")
        if scores.ndim != 1 or scores.shape[0] != boxes.shape[0]:
            raise ValueError(
                f"scores must have shape ({boxes.shape[0]},), got {scores.shape}"
            )
        if boxes.size:
            if not np.isfinite(boxes).all():
                raise ValueError("boxes must be finite")
            if (boxes[:, :2] <= 0.0).any():
                raise ValueError("box extents must be positive")
        if scores.size and (
            not np.isfinite(scores).all() or (scores < 0.0).any() or (scores > 1.0).any()
        ):
            raise ValueError("scores must lie in [0, 1]")
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return self.boxes.shape[0]

    def subset(self, indices: np.ndarray) -> "Detections":
        return Detections(self.boxes[indices], self.scores[indices])

    @classmethod
    def empty(cls) -> "Detections":
        return cls(np.empty((0, 4)), np.empty(0))


@dataclass(frozen=True)
class KeepResult:
    """Kept original indices, ascending; soft suppression also reports all rescored scores."""

    kept: np.ndarray
    rescored: np.ndarray | None = None


@dataclass(frozen=True)
class PipelineResult:
    """Pipeline output: final kept indices, pre-filter survivors, per-stage durations."""

    kept: np.ndarray
    rescored: np.ndarray | None
    prefilter_kept: np.ndarray
    stage_ms: dict


def _no_kept() -> np.ndarray:
    return np.empty(0, dtype=np.int64)


def _check_threshold(value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"iou threshold must be in [0, 1], got {value}")
    return value


def _descending_order(scores: np.ndarray) -> np.ndarray:
    # stable sort: equal scores stay in original-index order
    return np.argsort(-scores, kind="stable").astype(np.int64, copy=False)


def nms(d: Detections, iou_threshold: float) -> KeepResult:
    """Greedy suppression by descending score; matches the naive reference exactly.

    A box is removed when its IoU with an earlier surviving box is strictly
    above the threshold.
    """
    threshold = _check_threshold(iou_threshold)
    if len(d) == 0:
        return KeepResult(_no_kept())
    corners = boxes_to_corners(d.boxes)
    areas = np.ascontiguousarray(d.boxes[:, 0] * d.boxes[:, 1])
    order = _descending_order(d.scores)
    kept = backends.kernels().greedy_nms(corners, areas, order, threshold)
    return KeepResult(np.sort(kept))


def nms_naive(d: Detections, iou_threshold: float) -> KeepResult:
    """Quadratic reference suppression: keep a box iff no already-kept box overlaps it.

    Deliberately independent of the kernel backends — this is the oracle the
    fast paths are checked and benchmarked against.
    """
    threshold = _check_threshold(iou_threshold)
    if len(d) == 0:
        return KeepResult(_no_kept())
    left = d.boxes[:, 2] - d.boxes[:, 0] / 2.0
    right = d.boxes[:, 2] + d.boxes[:, 0] / 2.0
    top = d.boxes[:, 3] - d.boxes[:, 1] / 2.0
    bottom = d.boxes[:, 3] + d.boxes[:, 1] / 2.0
    area = d.boxes[:, 0] * d.boxes[:, 1]
    kept: list[int] = []
    for i in _descending_order(d.scores):
        if kept:
            k = np.asarray(kept)
            iw = np.minimum(right[i], right[k]) - np.maximum(left[i], left[k])
            ih = np.minimum(bottom[i], bottom[k]) - np.maximum(top[i], top[k])
            inter = np.clip(iw, 0.0, None) * np.clip(ih, 0.0, None)
            inter = np.minimum(inter, np.minimum(area[i], area[k]))
            overlap = inter / (area[i] + area[k] - inter)
            if (overlap > threshold).any():
                continue
        kept.append(int(i))
    return KeepResult(np.array(sorted(kept), dtype=np.int64))


def soft_nms(
    d: Detections,
    method: str = "linear",
    sigma: float = 0.5,
    score_floor: float = 1e-3,
) -> KeepResult:
    """Decay-based suppression.

    Boxes are visited in descending rescored order; each visit multiplies
    every unvisited score by (1 - iou) (linear) or exp(-iou^2 / sigma)
    (gaussian). Boxes whose final rescored value falls below `score_floor`
    are dropped from the kept set.
    """
    if method not in _SOFT_METHODS:
        raise ValueError(f"unknown soft suppression method {method!r}")
    sigma = float(sigma)
    if method == "gaussian" and sigma <= 0.0:
        raise ValueError(f"sigma must be positive for the gaussian method, got {sigma}")
    score_floor = float(score_floor)
    if not 0.0 <= score_floor < 1.0:
        raise ValueError(f"score_floor must be in [0, 1), got {score_floor}")
    if len(d) == 0:
        return KeepResult(_no_kept(), np.empty(0))
    corners = boxes_to_corners(d.boxes)
    areas = np.ascontiguousarray(d.boxes[:, 0] * d.boxes[:, 1])
    rescored = backends.kernels().soft_rescore(
        corners, areas, d.scores, _SOFT_METHODS[method], sigma
    )
    kept = np.flatnonzero(rescored >= score_floor).astype(np.int64, copy=False)
    return KeepResult(kept, rescored)


def hnms(d: Detections, params: HashParams, *, threads: int = 1) -> KeepResult:
    """Keep the highest-scoring box of every hash cell (earliest index on score ties).

    One hash and at most one cell update per box: linear time, no pairwise
    IoU. The per-cell winner is identical no matter how the hashing phase is
    parallelized.
    """
    if len(d) == 0:
        return KeepResult(_no_kept())
    codes = hash_boxes(d.boxes, params, threads=threads)
    keys = pack_rows(codes)
    kept = backends.kernels().cell_max_indices(keys, d.scores)
    return KeepResult(kept)


def _radical_inverse(k: int) -> float:
    value, denom = 0.0, 1.0
    while k:
        denom *= 2.0
        value += (k & 1) / denom
        k >>= 1
    return value


def multi_hnms(d: Detections, alpha: float, k_count: int, *, threads: int = 1) -> KeepResult:
    """Chain hash-cell suppression over the K staggered hash functions.

    The members are applied in bit-reversed order of their shift (0, 1/2,
    1/4, 3/4, ...), so for power-of-two K the first half of the chain is
    exactly the K/2 chain. Each pass filters the previous pass's survivors:
    kept(2K) is a subset of kept(K), and K = 1 is exactly `hnms` with
    canonical parameters.
    """
    members = hash_family(alpha, k_count)
    keep = np.arange(len(d), dtype=np.int64)
    current = d
    for index in sorted(range(k_count), key=_radical_inverse):
        result = hnms(current, members[index], threads=threads)
        keep = keep[result.kept]
        current = current.subset(result.kept)
    return KeepResult(keep)


def prefilter_pipeline(
    d: Detections,
    alpha: float,
    k_count: int,
    stage2: str = "nms",
    *,
    threshold: float = 0.7,
    method: str = "linear",
    sigma: float = 0.5,
    score_floor: float = 1e-3,
    threads: int = 1,
) -> PipelineResult:
    """Hash-cell pre-filter followed by exact suppression on the survivors.

    `stage2` is "nms" (with `threshold`) or "soft" (with `method`, `sigma`,
    `score_floor`). Kept indices refer to the original input; for a soft
    stage the rescored array covers all N inputs, with pre-filtered boxes
    keeping their original scores.
    """
    if stage2 not in ("nms", "soft"):
        raise ValueError(f"unknown stage2 {stage2!r} (expected 'nms' or 'soft')")
    start = time.perf_counter()
    pre = multi_hnms(d, alpha, k_count, threads=threads)
    mid = time.perf_counter()
    survivors = d.subset(pre.kept)
    rescored = None
    if stage2 == "nms":
        result = nms(survivors, threshold)
    else:
        result = soft_nms(survivors, method=method, sigma=sigma, score_floor=score_floor)
        rescored = d.scores.copy()
        rescored[pre.kept] = result.rescored
    end = time.perf_counter()
    kept = pre.kept[result.kept]
    stage_ms = {
        "prefilter": (mid - start) * 1e3,
        "stage2": (end - mid) * 1e3,
        "total": (end - start) * 1e3,
    }
    return PipelineResult(kept, rescored, pre.kept, stage_ms)
