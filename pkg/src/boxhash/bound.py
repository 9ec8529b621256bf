"""The analytic IoU floor for two boxes hashed to the same cell.

Written relative to the cell center, the two boxes are

    w_k = w0 / alpha**(i + i_k),   x_k = (bx + m + m_k) * delta_i,   k = 1, 2

with each offset i_k, j_k, m_k, n_k in [-0.5, 0.5). Their IoU does not
depend on w0, h0, bx, by or the cell indices, only on alpha and the eight
offsets, and its minimum is attained with every offset at a boundary. The
bound is therefore computed by enumerating the 2**8 corner assignments and
taking the smallest IoU; no closed form is used.
"""

import itertools
import math
from dataclasses import dataclass, fields
from functools import lru_cache

from .geometry import Box, iou
from .hashing import HashCode, HashParams, cell_geometry

__all__ = ["CornerConfig", "nonzero_condition", "materialize_config", "lower_bound"]

_CORNER_VALUES = (-0.5, 0.5)


@dataclass(frozen=True)
class CornerConfig:
    """One corner assignment: the eight cell-center offsets, each exactly +-0.5."""

    i1: float
    j1: float
    m1: float
    n1: float
    i2: float
    j2: float
    m2: float
    n2: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value not in _CORNER_VALUES:
                raise ValueError(f"corner offset {f.name} must be -0.5 or 0.5, got {value!r}")


def _check_alpha(alpha: float) -> None:
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha) and 0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha!r}")


def nonzero_condition(alpha: float) -> bool:
    """True when same-cell boxes are guaranteed a strictly positive IoU.

    The worst case pairs the smallest in-cell size alpha**0.5 * W_i with the
    largest center distance delta_i, giving the test
    (1 - alpha) / (1 + alpha) < sqrt(alpha). Holds for all alpha >= 0.3.
    """
    _check_alpha(alpha)
    return (1.0 - alpha) / (1.0 + alpha) < math.sqrt(alpha)


def materialize_config(
    cfg: CornerConfig, params: HashParams, cell: HashCode
) -> tuple[Box, Box]:
    """Build the two concrete boxes a corner assignment describes in a given cell."""
    geom = cell_geometry(cell.i, cell.j, params)
    box1 = Box(
        params.w0 / params.alpha ** (cell.i + cfg.i1),
        params.h0 / params.alpha ** (cell.j + cfg.j1),
        (params.bx + cell.m + cfg.m1) * geom.delta_i,
        (params.by + cell.n + cfg.n1) * geom.delta_j,
    )
    box2 = Box(
        params.w0 / params.alpha ** (cell.i + cfg.i2),
        params.h0 / params.alpha ** (cell.j + cfg.j2),
        (params.bx + cell.m + cfg.m2) * geom.delta_i,
        (params.by + cell.n + cfg.n2) * geom.delta_j,
    )
    return box1, box2


@lru_cache(maxsize=256)
def lower_bound(alpha: float) -> float:
    """Smallest possible IoU of two boxes sharing a hash cell.

    Returns 0 when nonzero_condition fails. Otherwise enumerates all 2**8
    corner assignments in the unit cell (the bound is cell- and
    parameter-independent, so w0 = h0 = 1, bx = by = 0 and cell (0, 0, 0, 0)
    lose nothing) and returns the minimum IoU. Memoized per alpha; the
    memo fill is idempotent, so concurrent first calls are safe.
    """
    _check_alpha(alpha)
    alpha = float(alpha)
    if not nonzero_condition(alpha):
        return 0.0
    delta = (1.0 - alpha) / (1.0 + alpha)
    best = 1.0
    for off in itertools.product(_CORNER_VALUES, repeat=8):
        box1 = Box(alpha ** -off[0], alpha ** -off[1], off[2] * delta, off[3] * delta)
        box2 = Box(alpha ** -off[4], alpha ** -off[5], off[6] * delta, off[7] * delta)
        value = iou(box1, box2)
        if value < best:
            best = value
    return best
