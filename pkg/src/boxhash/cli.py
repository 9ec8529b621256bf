"""Command-line front end: cell hashing, bound computation, suppression, benchmarks.

Box files are UTF-8, either a JSON array of {w, h, cx, cy, score} objects or
CSV with the header row ``w,h,cx,cy,score``. Suppression results are written
as JSON ``{"schema_version", "kept", "timings_ms", ...}``; benchmark results
as CSV/JSON with a fixed column order. All numeric output uses '.' as the
decimal separator regardless of locale.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, backends
from .bench import SCHEMA_VERSION, SceneSpec, csv_string, generate_scene, reports_to_json, run_bench, write_csv
from .bound import lower_bound
from .hashing import HashParams, hash_boxes
from .suppress import Detections, hnms, multi_hnms, nms, prefilter_pipeline, soft_nms

__all__ = ["main", "load_box_file", "BoxFileError", "SCHEMA_VERSION"]

_FIELDS = ("w", "h", "cx", "cy", "score")


class BoxFileError(ValueError):
    """Unparseable or invalid box file; the message carries the offending location."""


def _check_record(where: str, values) -> list[float]:
    import math

    out = []
    for name, raw in zip(_FIELDS, values):
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise BoxFileError(f"{where}: field {name!r} is not a number: {raw!r}") from None
        if not math.isfinite(value):
            raise BoxFileError(f"{where}: field {name!r} must be finite, got {value}")
        out.append(value)
    if out[0] <= 0 or out[1] <= 0:
        raise BoxFileError(f"{where}: box extents must be positive (w={out[0]}, h={out[1]})")
    if not 0.0 <= out[4] <= 1.0:
        raise BoxFileError(f"{where}: score must be in [0, 1], got {out[4]}")
    return out


def _parse_json_boxes(path: str, text: str) -> list[list[float]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BoxFileError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, list):
        raise BoxFileError(f"{path}: expected a JSON array of records")
    rows = []
    for k, record in enumerate(data):
        if not isinstance(record, dict):
            raise BoxFileError(f"{path}: record {k}: expected an object")
        missing = [f for f in _FIELDS if f not in record]
        if missing:
            raise BoxFileError(f"{path}: record {k}: missing fields {missing}")
        rows.append(_check_record(f"{path}: record {k}", [record[f] for f in _FIELDS]))
    return rows


def _parse_csv_boxes(path: str, text: str) -> list[list[float]]:
    import csv as _csv

    reader = _csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        return []
    if [c.strip() for c in header] != list(_FIELDS):
        raise BoxFileError(
            f"{path}: line 1: expected header {','.join(_FIELDS)}, got {','.join(header)}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(_FIELDS):
            raise BoxFileError(f"{path}: line {lineno}: expected {len(_FIELDS)} columns, got {len(row)}")
        rows.append(_check_record(f"{path}: line {lineno}", row))
    return rows


def load_box_file(path: str) -> Detections:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BoxFileError(f"{path}: {exc.strerror or exc}") from None
    stripped = text.lstrip()
    if not stripped:
        return Detections.empty()
    if Path(path).suffix.lower() == ".json" or stripped[0] == "[":
        rows = _parse_json_boxes(path, text)
    else:
        rows = _parse_csv_boxes(path, text)
    if not rows:
        return Detections.empty()
    data = np.asarray(rows, dtype=np.float64)
    return Detections(data[:, :4], data[:, 4])


def _resolve_threads(value: int | None) -> int:
    if value is None:
        raw = os.environ.get("BOXHASH_THREADS", "1")
        try:
            value = int(raw)
        except ValueError:
            raise BoxFileError(f"BOXHASH_THREADS must be an integer, got {raw!r}") from None
    if value < 1:
        raise BoxFileError(f"threads must be >= 1, got {value}")
    return value


def _cmd_bound(args) -> int:
    print(f"{lower_bound(args.alpha):.6g}")
    return 0


def _cmd_hash(args) -> int:
    d = load_box_file(args.input)
    params = HashParams(args.alpha, args.w0, args.h0, args.bx, args.by)
    codes = hash_boxes(d.boxes, params, threads=_resolve_threads(args.threads))
    for i, j, m, n in codes:
        print(f"{i} {j} {m} {n}")
    return 0


def _cmd_suppress(args) -> int:
    d = load_box_file(args.input)
    threads = _resolve_threads(args.threads)
    payload = {"schema_version": SCHEMA_VERSION, "algo": args.algo}
    with backends.override(args.backend):
        start = time.perf_counter()
        if args.algo == "nms":
            result = nms(d, args.threshold)
        elif args.algo == "soft":
            result = soft_nms(d, method=args.method, sigma=args.sigma, score_floor=args.score_floor)
        elif args.algo == "hnms":
            result = hnms(d, HashParams(args.alpha, args.w0, args.h0, args.bx, args.by), threads=threads)
        elif args.algo == "multi":
            result = multi_hnms(d, args.alpha, args.k, threads=threads)
        else:
            result = prefilter_pipeline(
                d,
                args.alpha,
                args.k,
                args.stage2,
                threshold=args.threshold,
                method=args.method,
                sigma=args.sigma,
                score_floor=args.score_floor,
                threads=threads,
            )
        total_ms = (time.perf_counter() - start) * 1e3
    payload["kept"] = [int(v) for v in result.kept]
    timings = {"total": total_ms}
    if hasattr(result, "stage_ms"):
        timings.update(result.stage_ms)
    payload["timings_ms"] = timings
    if result.rescored is not None:
        payload["rescored"] = [float(v) for v in result.rescored]
    text = json.dumps(payload, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _scene_from_args(args) -> SceneSpec:
    if args.spec:
        try:
            raw = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise BoxFileError(f"{args.spec}: {exc}") from None
        try:
            return SceneSpec(**raw)
        except TypeError as exc:
            raise BoxFileError(f"{args.spec}: {exc}") from None
    if args.truths is None or args.per_truth is None:
        raise BoxFileError("either --spec or both --truths and --per-truth are required")
    return SceneSpec(
        ground_truth_count=args.truths,
        proposals_per_truth=args.per_truth,
        image_w=args.image_w,
        image_h=args.image_h,
        jitter_scale=args.jitter,
        score_model=args.score_model,
        seed=args.seed,
    )


def _cmd_bench(args) -> int:
    spec = _scene_from_args(args)
    d = generate_scene(spec)
    algorithms = [a.strip() for a in args.algo.split(",") if a.strip()]
    backend_names = list(backends.available()) if args.backend == "both" else [args.backend]
    reports = []
    for backend_name in backend_names:
        reports.extend(
            run_bench(
                d,
                algorithms,
                repetitions=args.repeat,
                warmup=args.warmup,
                alpha=args.alpha,
                k_count=args.k,
                threshold=args.threshold,
                backend=backend_name,
            )
        )
    if args.csv:
        write_csv(reports, args.csv)
    else:
        sys.stdout.write(csv_string(reports))
    if args.json:
        Path(args.json).write_text(reports_to_json(reports) + "\n", encoding="utf-8")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxhash",
        description="Bounding-box suppression toolkit: hashing, IoU bounds, suppression, benchmarks.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"boxhash {__version__} (output schema {SCHEMA_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="print the same-cell IoU lower bound for alpha")
    p_bound.add_argument("--alpha", type=float, required=True)
    p_bound.set_defaults(func=_cmd_bound)

    p_hash = sub.add_parser("hash", help="print the hash code of every box in a file")
    p_hash.add_argument("--input", required=True)
    p_hash.add_argument("--alpha", type=float, required=True)
    p_hash.add_argument("--w0", type=float, default=1.0)
    p_hash.add_argument("--h0", type=float, default=1.0)
    p_hash.add_argument("--bx", type=float, default=0.0)
    p_hash.add_argument("--by", type=float, default=0.0)
    p_hash.add_argument("--threads", type=int, default=None)
    p_hash.set_defaults(func=_cmd_hash)

    p_sup = sub.add_parser("suppress", help="suppress a box file, write kept indices as JSON")
    p_sup.add_argument("--input", required=True)
    p_sup.add_argument("--algo", required=True, choices=("nms", "soft", "hnms", "multi", "pipeline"))
    p_sup.add_argument("--alpha", type=float, default=0.7)
    p_sup.add_argument("--k", type=int, default=1)
    p_sup.add_argument("--threshold", type=float, default=0.7)
    p_sup.add_argument("--stage2", choices=("nms", "soft"), default="nms")
    p_sup.add_argument("--method", choices=("linear", "gaussian"), default="linear")
    p_sup.add_argument("--sigma", type=float, default=0.5)
    p_sup.add_argument("--score-floor", dest="score_floor", type=float, default=1e-3)
    p_sup.add_argument("--w0", type=float, default=1.0)
    p_sup.add_argument("--h0", type=float, default=1.0)
    p_sup.add_argument("--bx", type=float, default=0.0)
    p_sup.add_argument("--by", type=float, default=0.0)
    p_sup.add_argument("--output", default=None)
    p_sup.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto")
    p_sup.add_argument("--threads", type=int, default=None)
    p_sup.set_defaults(func=_cmd_suppress)

    p_bench = sub.add_parser("bench", help="time algorithms on a synthetic crowded scene")
    p_bench.add_argument("--spec", default=None, help="JSON file with SceneSpec fields")
    p_bench.add_argument("--truths", type=int, default=None)
    p_bench.add_argument("--per-truth", dest="per_truth", type=int, default=None)
    p_bench.add_argument("--image-w", dest="image_w", type=float, default=2000.0)
    p_bench.add_argument("--image-h", dest="image_h", type=float, default=2000.0)
    p_bench.add_argument("--jitter", type=float, default=0.08)
    p_bench.add_argument("--score-model", dest="score_model", default="iou_correlated",
                         choices=("iou_correlated", "uniform"))
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--algo", default="nms,hnms", help="comma-separated algorithm labels")
    p_bench.add_argument("--alpha", type=float, default=0.7)
    p_bench.add_argument("--k", type=int, default=1)
    p_bench.add_argument("--threshold", type=float, default=0.7)
    p_bench.add_argument("--repeat", type=int, default=5)
    p_bench.add_argument("--warmup", type=int, default=1)
    p_bench.add_argument("--csv", default=None)
    p_bench.add_argument("--json", default=None)
    p_bench.add_argument("--backend", choices=("auto", "compiled", "python", "both"), default="auto")
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BoxFileError, ValueError, RuntimeError) as exc:
        print(f"boxhash: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
