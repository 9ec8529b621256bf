"""boxhash: bounding-box suppression via IoU-metric hashing.

Exact greedy NMS and SoftNMS, hash-cell suppression with an analytic
same-cell IoU lower bound, multi-pass hashing with staggered cells, a
pre-filter pipeline, and a benchmark harness. The hot suppression loops run
on a compiled extension when built, with a numpy fallback selected at
import (see `boxhash.backends`).
"""

from .bench import BenchReport, SceneSpec, generate_scene, jaccard, run_bench
from .bound import CornerConfig, lower_bound, materialize_config, nonzero_condition
from .geometry import Box, CornerBox, from_corners, iou, to_corners
from .hashing import (
    CellGeometry,
    HashCode,
    HashParams,
    canonical_params,
    cell_geometry,
    hash_boxes,
    hash_family,
    iou_hash,
    pack_code,
    representative_value,
    unpack_code,
)
from .suppress import (
    Detections,
    KeepResult,
    PipelineResult,
    hnms,
    multi_hnms,
    nms,
    nms_naive,
    prefilter_pipeline,
    soft_nms,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Box",
    "CornerBox",
    "iou",
    "to_corners",
    "from_corners",
    "HashParams",
    "HashCode",
    "CellGeometry",
    "canonical_params",
    "cell_geometry",
    "iou_hash",
    "hash_boxes",
    "hash_family",
    "pack_code",
    "unpack_code",
    "representative_value",
    "CornerConfig",
    "nonzero_condition",
    "materialize_config",
    "lower_bound",
    "Detections",
    "KeepResult",
    "PipelineResult",
    "nms",
    "nms_naive",
    "soft_nms",
    "hnms",
    "multi_hnms",
    "prefilter_pipeline",
    "SceneSpec",
    "BenchReport",
    "generate_scene",
    "jaccard",
    "run_bench",
]
