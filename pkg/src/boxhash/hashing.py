"""IoU-metric locality hashing of boxes.

A box (w, h, cx, cy) maps to four integer cell indices (i, j, m, n): sizes
are binned on a log scale with ratio ``alpha`` between adjacent bin centers,

    i = round((log w0 - log w) / log alpha),        W_i = w0 / alpha**i

and offsets are binned on a uniform grid whose pitch scales with the size
bin,

    delta_i = W_i * (1 - alpha) / (1 + alpha),      m = round(cx / delta_i - bx)

(the j/n pair is the same construction on h and cy). Two boxes sitting on
adjacent bin centers in any single dimension have IoU exactly ``alpha``,
which makes every cell cover roughly the same amount of IoU space.

``round`` is round-half-away-from-zero, fixed so results are reproducible
across platforms (exact ties are measure-zero but must not drift).
"""

import concurrent.futures
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Box

__all__ = [
    "ALPHA_MAX",
    "PACK_FIELD_MIN",
    "PACK_FIELD_MAX",
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
    "pack_rows",
    "representative_value",
]

# alpha -> 1 collapses the offset pitch to zero and overflows the offset
# indices, so the usable range is capped well below 1.
ALPHA_MAX = 0.95

# Each code field occupies one 16-bit lane of the packed 64-bit key.
PACK_FIELD_MIN = -32768
PACK_FIELD_MAX = 32767
_PACK_BIAS = 32768

# The decimal encoding i + j*1e4 + m*1e8 + n*1e12 only decodes uniquely
# while every field stays inside half a decimal lane.
_DECIMAL_LANE_RADIUS = 4999

_DIM_NAMES = ("width index i", "height index j", "x-offset index m", "y-offset index n")


@dataclass(frozen=True)
class HashParams:
    """The five hash parameters: cell ratio alpha, size origins w0/h0, offset shifts bx/by."""

    alpha: float
    w0: float = 1.0
    h0: float = 1.0
    bx: float = 0.0
    by: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "w0", "h0", "bx", "by"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"hash parameter {name} must be finite, got {value!r}")
        if not 0.0 < self.alpha <= ALPHA_MAX:
            raise ValueError(
                f"alpha must be in (0, {ALPHA_MAX}], got {self.alpha}"
            )
        if self.w0 <= 0.0 or self.h0 <= 0.0:
            raise ValueError(f"w0 and h0 must be positive, got w0={self.w0}, h0={self.h0}")


@dataclass(frozen=True)
class HashCode:
    """Cell indices (i, j, m, n) for size-x, size-y, offset-x, offset-y."""

    i: int
    j: int
    m: int
    n: int

    def astuple(self) -> tuple[int, int, int, int]:
        return (self.i, self.j, self.m, self.n)


@dataclass(frozen=True)
class CellGeometry:
    """Size-bin centers and offset pitches of one (i, j) cell."""

    wi: float
    hj: float
    delta_i: float
    delta_j: float


def canonical_params(alpha: float) -> HashParams:
    """Parameters with unit size origins and zero offset shifts."""
    return HashParams(alpha, 1.0, 1.0, 0.0, 0.0)


def cell_geometry(i: int, j: int, params: HashParams) -> CellGeometry:
    wi = params.w0 / params.alpha**i
    hj = params.h0 / params.alpha**j
    ratio = (1.0 - params.alpha) / (1.0 + params.alpha)
    return CellGeometry(wi, hj, wi * ratio, hj * ratio)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def hash_boxes(boxes: np.ndarray, params: HashParams, threads: int = 1) -> np.ndarray:
    """Hash (N, 4) rows of (w, h, cx, cy) to (N, 4) int64 codes (i, j, m, n).

    With ``threads > 1`` the rows are hashed in chunks by a thread pool; the
    result is elementwise and therefore independent of the worker count.
    """
    boxes = np.ascontiguousarray(boxes, dtype=np.float64)
    if boxes.ndim != 2 or boxes.shape[1] != 4:
        raise ValueError(f"boxes must have shape (N, 4), got {boxes.shape}")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if threads == 1 or boxes.shape[0] < 2 * threads:
        return _hash_chunk(boxes, params)
    chunks = np.array_split(boxes, threads)
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda chunk: _hash_chunk(chunk, params), chunks))
    return np.concatenate(parts)


def _hash_chunk(boxes: np.ndarray, params: HashParams) -> np.ndarray:
    log_alpha = math.log(params.alpha)
    i = _round_half_away((math.log(params.w0) - np.log(boxes[:, 0])) / log_alpha)
    j = _round_half_away((math.log(params.h0) - np.log(boxes[:, 1])) / log_alpha)
    ratio = (1.0 - params.alpha) / (1.0 + params.alpha)
    delta_i = (params.w0 * params.alpha**-i) * ratio
    delta_j = (params.h0 * params.alpha**-j) * ratio
    m = _round_half_away(boxes[:, 2] / delta_i - params.bx)
    n = _round_half_away(boxes[:, 3] / delta_j - params.by)
    code = np.stack([i, j, m, n], axis=1)
    _check_pack_range(code)
    return code.astype(np.int64)


def _check_pack_range(code: np.ndarray) -> None:
    bad = (code < PACK_FIELD_MIN) | (code > PACK_FIELD_MAX)
    if bad.any():
        row, dim = np.argwhere(bad)[0]
        raise ValueError(
            f"{_DIM_NAMES[dim]}={code[row, dim]:.0f} for box {row} is outside the "
            f"packable range [{PACK_FIELD_MIN}, {PACK_FIELD_MAX}]"
        )


def iou_hash(b: Box, params: HashParams) -> HashCode:
    """Hash one box to its cell."""
    row = np.array([[b.w, b.h, b.cx, b.cy]], dtype=np.float64)
    i, j, m, n = hash_boxes(row, params)[0]
    return HashCode(int(i), int(j), int(m), int(n))


def hash_family(alpha: float, k_count: int) -> list[HashParams]:
    """The K staggered hash functions used by multi-pass suppression.

    Member k shifts the size origins by alpha**(-k/K) and the offset grids
    by k/K, spreading the cell boundaries evenly over one cell; member 0 is
    always the canonical parameter set.
    """
    if k_count < 1:
        raise ValueError(f"k_count must be >= 1, got {k_count}")
    members = []
    for k in range(k_count):
        origin = alpha ** (-k / k_count)
        shift = k / k_count
        members.append(HashParams(alpha, origin, origin, shift, shift))
    return members


def _check_field(name: str, value: int, lo: int, hi: int) -> int:
    value = int(value)
    if not lo <= value <= hi:
        raise ValueError(f"code field {name}={value} is outside [{lo}, {hi}]")
    return value


def pack_code(code: HashCode) -> int:
    """Injective 64-bit key: each field biased into its own 16-bit lane."""
    i = _check_field("i", code.i, PACK_FIELD_MIN, PACK_FIELD_MAX)
    j = _check_field("j", code.j, PACK_FIELD_MIN, PACK_FIELD_MAX)
    m = _check_field("m", code.m, PACK_FIELD_MIN, PACK_FIELD_MAX)
    n = _check_field("n", code.n, PACK_FIELD_MIN, PACK_FIELD_MAX)
    return (
        ((i + _PACK_BIAS) << 48)
        | ((j + _PACK_BIAS) << 32)
        | ((m + _PACK_BIAS) << 16)
        | (n + _PACK_BIAS)
    )


def unpack_code(key: int) -> HashCode:
    if not 0 <= key < 1 << 64:
        raise ValueError(f"packed key {key} is not a 64-bit value")
    return HashCode(
        ((key >> 48) & 0xFFFF) - _PACK_BIAS,
        ((key >> 32) & 0xFFFF) - _PACK_BIAS,
        ((key >> 16) & 0xFFFF) - _PACK_BIAS,
        (key & 0xFFFF) - _PACK_BIAS,
    )


def pack_rows(codes: np.ndarray) -> np.ndarray:
    """Pack (N, 4) int64 code rows into (N,) uint64 keys (batch pack_code)."""
    codes = np.asarray(codes, dtype=np.int64)
    _check_pack_range(codes)
    biased = (codes + _PACK_BIAS).astype(np.uint64)
    return (
        (biased[:, 0] << np.uint64(48))
        | (biased[:, 1] << np.uint64(32))
        | (biased[:, 2] << np.uint64(16))
        | biased[:, 3]
    )


def representative_value(code: HashCode) -> int:
    """Decimal-lane key i + j*10^4 + m*10^8 + n*10^12.

    Kept for comparison purposes only: the decimal lanes collide once a
    field leaves [-4999, 4999], so internal cell keys use pack_code instead.
    """
    i = _check_field("i", code.i, -_DECIMAL_LANE_RADIUS, _DECIMAL_LANE_RADIUS)
    j = _check_field("j", code.j, -_DECIMAL_LANE_RADIUS, _DECIMAL_LANE_RADIUS)
    m = _check_field("m", code.m, -_DECIMAL_LANE_RADIUS, _DECIMAL_LANE_RADIUS)
    n = _check_field("n", code.n, -_DECIMAL_LANE_RADIUS, _DECIMAL_LANE_RADIUS)
    return i + j * 10**4 + m * 10**8 + n * 10**12
