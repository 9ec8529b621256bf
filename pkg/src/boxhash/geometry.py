"""Exact axis-aligned box arithmetic: areas, intersection-over-union, format conversion.

Boxes are carried in center-offset form (w, h, cx, cy). All arithmetic is
64-bit floating point.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Box", "CornerBox", "iou", "to_corners", "from_corners", "boxes_to_corners"]


@dataclass(frozen=True)
class Box:
    """One axis-aligned rectangle: width, height and center offset in pixels."""

    w: float
    h: float
    cx: float
    cy: float

    def __post_init__(self):
        for name in ("w", "h", "cx", "cy"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"box field {name} must be finite, got {value!r}")
        if self.w <= 0.0 or self.h <= 0.0:
            raise ValueError(f"box extents must be positive, got w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class CornerBox:
    """The same rectangle by its top-left and bottom-right corners."""

    left: float
    top: float
    right: float
    bottom: float

    def __post_init__(self):
        for name in ("left", "top", "right", "bottom"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"corner field {name} must be finite, got {value!r}")
        if not (self.right > self.left and self.bottom > self.top):
            raise ValueError(
                f"degenerate corners: need right > left and bottom > top, got {self!r}"
            )


def to_corners(b: Box) -> CornerBox:
    return CornerBox(
        b.cx - 0.5 * b.w, b.cy - 0.5 * b.h, b.cx + 0.5 * b.w, b.cy + 0.5 * b.h
    )


def from_corners(c: CornerBox) -> Box:
    return Box(
        c.right - c.left,
        c.bottom - c.top,
        0.5 * (c.left + c.right),
        0.5 * (c.top + c.bottom),
    )


def iou(a: Box, b: Box) -> float:
    """Intersection area over union area, in [0, 1].

    Negative overlap extents clamp to zero, so disjoint boxes score 0. The
    overlap along each axis is min(w1, w2, (w1+w2)/2 - dx, (w1+w2)/2 + dx),
    which avoids the corner round-trip and keeps iou(b, b) == 1.0 exact.
    """
    dx = b.cx - a.cx
    half_w = 0.5 * (a.w + b.w)
    iw = min(a.w, b.w, half_w - dx, half_w + dx)
    if iw <= 0.0:
        return 0.0
    dy = b.cy - a.cy
    half_h = 0.5 * (a.h + b.h)
    ih = min(a.h, b.h, half_h - dy, half_h + dy)
    if ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def boxes_to_corners(boxes: np.ndarray) -> np.ndarray:
    """Convert (N, 4) rows of (w, h, cx, cy) into (left, top, right, bottom) rows."""
    boxes = np.asarray(boxes, dtype=np.float64)
    out = np.empty_like(boxes)
    half_w = 0.5 * boxes[:, 0]
    half_h = 0.5 * boxes[:, 1]
    out[:, 0] = boxes[:, 2] - half_w
    out[:, 1] = boxes[:, 3] - half_h
    out[:, 2] = boxes[:, 2] + half_w
    out[:, 3] = boxes[:, 3] + half_h
    return out
