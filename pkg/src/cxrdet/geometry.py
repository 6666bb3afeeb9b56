"""Axis-aligned box geometry: areas, overlaps, intersection over union.

Boxes are stored corner-form (x_min, y_min, x_max, y_max) in continuous
pixel coordinates, with no pixel-inclusive "+1" convention. All arithmetic
is double precision.
"""

import math
from dataclasses import dataclass

__all__ = ["Box", "area", "intersection_area", "iou"]


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle. Zero-area boxes are allowed; negative
    extents and non-finite coordinates are rejected."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        for v in (self.x_min, self.y_min, self.x_max, self.y_max):
            if not math.isfinite(v):
                raise ValueError(f"box coordinates must be finite: {self!r}")
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError(f"box extents must be non-negative: {self!r}")

    @classmethod
    def from_xywh(cls, x, y, w, h) -> "Box":
        """Build from the annotation-file (x, y, width, height) convention."""
        return cls(x, y, x + w, y + h)

    def to_xywh(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.width, self.height)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))


def area(box: Box) -> float:
    """Area in square pixels; zero for degenerate boxes."""
    return box.width * box.height


def intersection_area(a: Box, b: Box) -> float:
    """Overlap area; zero when disjoint or touching only along an edge."""
    w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if w <= 0.0 or h <= 0.0:
        return 0.0
    return w * h


def iou(a: Box, b: Box) -> float:
    """Intersection over union, in [0, 1].

    Union is computed as area(a) + area(b) - intersection. When both boxes
    have zero area the result is defined as 0 so scoring stays total over
    degenerate annotations.
    """
    inter = intersection_area(a, b)
    union = area(a) + area(b) - inter
    if union <= 0.0:
        return 0.0
    return inter / union
