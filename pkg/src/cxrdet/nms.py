"""Greedy non-maximum suppression, hard and soft.

All variants share one loop: repeatedly move the highest-scoring remaining
detection to the output, then rescale every remaining same-class score by a
decay factor that depends on its overlap with the box just kept:

    hard           s * [iou <= Nt]          (0/1 pruning)
    soft-linear    s * (1 - iou)   if iou > Nt, else unchanged
    soft-gaussian  s * exp(-iou^2 / sigma)

A detection is discarded the moment a decay pushes its score below
``score_cutoff``. Detections that are never decayed (factor 1) are kept no
matter how small their input score, so fully disjoint inputs always pass
through untouched.
"""

import math
from dataclasses import dataclass

from .geometry import Box, iou

__all__ = ["Detection", "NmsConfig", "nms", "HARD", "SOFT_LINEAR", "SOFT_GAUSSIAN"]

HARD = "hard"
SOFT_LINEAR = "soft-linear"
SOFT_GAUSSIAN = "soft-gaussian"

_MODES = (HARD, SOFT_LINEAR, SOFT_GAUSSIAN)


@dataclass(frozen=True)
class Detection:
    """A scored box, optionally tagged with a class id."""

    box: Box
    score: float
    class_id: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError(f"detection score must be in [0, 1]: {self.score!r}")


@dataclass(frozen=True)
class NmsConfig:
    """Suppression mode plus its parameters.

    ``iou_threshold`` is used by the hard and soft-linear modes, ``sigma``
    by the gaussian mode; ``score_cutoff`` applies to every mode.
    """

    mode: str = HARD
    iou_threshold: float = 0.5
    sigma: float = 0.5
    score_cutoff: float = 0.001

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"unknown NMS mode {self.mode!r}; expected one of {_MODES}")
        if not 0.0 < self.iou_threshold < 1.0:
            raise ValueError(f"iou_threshold must lie in (0, 1): {self.iou_threshold!r}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive: {self.sigma!r}")
        if self.score_cutoff < 0.0:
            raise ValueError(f"score_cutoff must be non-negative: {self.score_cutoff!r}")

    def decay(self, overlap: float) -> float:
        """Score multiplier applied for a given overlap with a kept box."""
        if self.mode == HARD:
            return 1.0 if overlap <= self.iou_threshold else 0.0
        if self.mode == SOFT_LINEAR:
            return 1.0 - overlap if overlap > self.iou_threshold else 1.0
        return math.exp(-(overlap * overlap) / self.sigma)


def nms(detections, config: NmsConfig | None = None) -> list[Detection]:
    """Suppress overlapping detections; returns survivors with decayed scores.

    Output is sorted by final score descending, ties broken by input order
    (the greedy pop order already guarantees both). Detections with distinct
    class ids never suppress each other.
    """
    cfg = config if config is not None else NmsConfig()
    # [input index, detection, current score]
    pending = [[i, d, d.score] for i, d in enumerate(detections)]
    kept: list[Detection] = []
    while pending:
        best = min(range(len(pending)), key=lambda j: (-pending[j][2], pending[j][0]))
        _, det, score = pending.pop(best)
        kept.append(Detection(det.box, score, det.class_id))
        survivors = []
        for entry in pending:
            other = entry[1]
            if other.class_id == det.class_id:
                factor = cfg.decay(iou(det.box, other.box))
                if factor < 1.0:
                    entry[2] *= factor
                    if entry[2] < cfg.score_cutoff:
                        continue
            survivors.append(entry)
        pending = survivors
    return kept
