"""Synthetic crowded scenes, wall-clock timing, and oracle-agreement reports.

Scenes are clusters of jittered proposals around random ground-truth boxes,
generated with numpy's PCG64 generator so a seed reproduces the exact same
arrays on any platform. Timing uses the monotonic performance counter with
warmup runs excluded, reported as mean +- sample std over the repetitions;
agreement is the Jaccard index of kept sets against the naive exact-NMS
oracle.
"""

import csv
import io
import json
import statistics
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import backends
from .hashing import canonical_params
from .suppress import (
    Detections,
    hnms,
    multi_hnms,
    nms,
    nms_naive,
    prefilter_pipeline,
    soft_nms,
)

__all__ = [
    "ALGORITHMS",
    "CSV_COLUMNS",
    "SCHEMA_VERSION",
    "SceneSpec",
    "BenchReport",
    "generate_scene",
    "jaccard",
    "run_bench",
    "write_csv",
    "reports_to_json",
]

ALGORITHMS = ("nms", "nms-naive", "soft", "hnms", "multi", "pipeline")

# bumped whenever the CSV column order or the JSON layouts change
SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "algorithm",
    "backend",
    "n_boxes",
    "mean_ms",
    "std_ms",
    "kept_count",
    "jaccard_vs_nms_oracle",
)

# std of the additive score noise in the iou_correlated model
_SCORE_NOISE = 0.05


@dataclass(frozen=True)
class SceneSpec:
    """Crowded-scene recipe: proposals_per_truth jittered copies of each ground truth."""

    ground_truth_count: int
    proposals_per_truth: int
    image_w: float = 2000.0
    image_h: float = 2000.0
    jitter_scale: float = 0.08
    score_model: str = "iou_correlated"
    seed: int = 0

    def __post_init__(self):
        if self.ground_truth_count < 1 or self.proposals_per_truth < 1:
            raise ValueError("ground_truth_count and proposals_per_truth must be >= 1")
        if self.image_w <= 0 or self.image_h <= 0:
            raise ValueError("image dimensions must be positive")
        if self.jitter_scale < 0:
            raise ValueError(f"jitter_scale must be >= 0, got {self.jitter_scale}")
        if self.score_model not in ("iou_correlated", "uniform"):
            raise ValueError(f"unknown score_model {self.score_model!r}")


@dataclass(frozen=True)
class BenchReport:
    algorithm: str
    backend: str
    n_boxes: int
    mean_ms: float
    std_ms: float
    kept_count: int
    jaccard_vs_nms_oracle: float


def _rowwise_iou(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    left = np.maximum(a[:, 2] - a[:, 0] / 2, b[:, 2] - b[:, 0] / 2)
    right = np.minimum(a[:, 2] + a[:, 0] / 2, b[:, 2] + b[:, 0] / 2)
    top = np.maximum(a[:, 3] - a[:, 1] / 2, b[:, 3] - b[:, 1] / 2)
    bottom = np.minimum(a[:, 3] + a[:, 1] / 2, b[:, 3] + b[:, 1] / 2)
    area_a = a[:, 0] * a[:, 1]
    area_b = b[:, 0] * b[:, 1]
    inter = np.clip(right - left, 0, None) * np.clip(bottom - top, 0, None)
    inter = np.minimum(inter, np.minimum(area_a, area_b))
    return inter / (area_a + area_b - inter)


def generate_scene(spec: SceneSpec) -> Detections:
    """Deterministic synthetic detections: N = ground_truth_count * proposals_per_truth.

    Proposal sizes are the truth sizes scaled by exp(N(0, jitter)) and
    centers shifted by N(0, jitter * size), so jitter_scale = 0 reproduces
    each truth exactly. Under the iou_correlated model a proposal's score is
    its IoU with its own truth plus gaussian noise, clipped to [0, 1].
    """
    rng = np.random.default_rng(spec.seed)
    g, r = spec.ground_truth_count, spec.proposals_per_truth
    n = g * r
    truth_w = rng.uniform(0.02, 0.08, g) * spec.image_w
    truth_h = rng.uniform(0.02, 0.08, g) * spec.image_h
    truth_x = rng.uniform(0.05, 0.95, g) * spec.image_w
    truth_y = rng.uniform(0.05, 0.95, g) * spec.image_h
    base = np.stack(
        [np.repeat(truth_w, r), np.repeat(truth_h, r), np.repeat(truth_x, r), np.repeat(truth_y, r)],
        axis=1,
    )
    w = base[:, 0] * np.exp(rng.normal(0.0, spec.jitter_scale, n))
    h = base[:, 1] * np.exp(rng.normal(0.0, spec.jitter_scale, n))
    cx = base[:, 2] + rng.normal(0.0, spec.jitter_scale, n) * base[:, 0]
    cy = base[:, 3] + rng.normal(0.0, spec.jitter_scale, n) * base[:, 1]
    boxes = np.stack([w, h, cx, cy], axis=1)
    if spec.score_model == "iou_correlated":
        scores = np.clip(
            _rowwise_iou(boxes, base) + rng.normal(0.0, _SCORE_NOISE, n), 0.0, 1.0
        )
    else:
        scores = rng.uniform(0.0, 1.0, n)
    return Detections(boxes, scores)


def jaccard(a: np.ndarray, b: np.ndarray) -> float:
    """|a & b| / |a | b| over kept-index sets; 1.0 when both are empty."""
    sa, sb = set(map(int, a)), set(map(int, b))
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def _make_runner(label, *, alpha, k_count, threshold, method, sigma, score_floor):
    if label == "nms":
        return lambda d: nms(d, threshold).kept
    if label == "nms-naive":
        return lambda d: nms_naive(d, threshold).kept
    if label == "soft":
        return lambda d: soft_nms(d, method=method, sigma=sigma, score_floor=score_floor).kept
    if label == "hnms":
        params = canonical_params(alpha)
        return lambda d: hnms(d, params).kept
    if label == "multi":
        return lambda d: multi_hnms(d, alpha, k_count).kept
    if label == "pipeline":
        return lambda d: prefilter_pipeline(
            d, alpha, k_count, "nms", threshold=threshold
        ).kept
    raise ValueError(f"unknown algorithm {label!r} (expected one of {ALGORITHMS})")


def run_bench(
    d: Detections,
    algorithms,
    repetitions: int = 5,
    warmup: int = 1,
    *,
    alpha: float = 0.7,
    k_count: int = 1,
    threshold: float = 0.7,
    oracle_threshold: float | None = None,
    method: str = "linear",
    sigma: float = 0.5,
    score_floor: float = 1e-3,
    backend: str | None = None,
) -> list[BenchReport]:
    """Time each algorithm on the same detections; single-threaded, warmup excluded."""
    if repetitions < 3:
        raise ValueError(f"repetitions must be >= 3, got {repetitions}")
    if warmup < 0:
        raise ValueError(f"warmup must be >= 0, got {warmup}")
    oracle_kept = nms_naive(d, threshold if oracle_threshold is None else oracle_threshold).kept
    reports = []
    with backends.override(backend or backends.active()) as backend_name:
        for label in algorithms:
            run = _make_runner(
                label,
                alpha=alpha,
                k_count=k_count,
                threshold=threshold,
                method=method,
                sigma=sigma,
                score_floor=score_floor,
            )
            for _ in range(warmup):
                run(d)
            times_ms = []
            kept = np.empty(0, dtype=np.int64)
            for _ in range(repetitions):
                start = time.perf_counter()
                kept = run(d)
                times_ms.append((time.perf_counter() - start) * 1e3)
            reports.append(
                BenchReport(
                    algorithm=label,
                    backend=backend_name,
                    n_boxes=len(d),
                    mean_ms=statistics.fmean(times_ms),
                    std_ms=statistics.stdev(times_ms),
                    kept_count=int(kept.shape[0]),
                    jaccard_vs_nms_oracle=jaccard(kept, oracle_kept),
                )
            )
    return reports


def write_csv(reports, destination) -> None:
    """One row per report, columns in CSV_COLUMNS order, '.' decimal separator."""

    def _emit(fh):
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for report in reports:
            row = asdict(report)
            writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in CSV_COLUMNS])

    if isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__"):
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            _emit(fh)
    else:
        _emit(destination)


def reports_to_json(reports) -> str:
    return json.dumps(
        {"schema_version": SCHEMA_VERSION, "reports": [asdict(r) for r in reports]},
        indent=2,
    )


def csv_string(reports) -> str:
    buffer = io.StringIO()
    write_csv(reports, buffer)
    return buffer.getvalue()
