"""Detection scoring and evaluation utilities.

The dataset score is the competition-style mean average precision: per
image, predictions are matched greedily to ground truth in descending
confidence order, a per-threshold precision tp / (tp + fp + fn) is computed
over a set of IoU thresholds, the per-image score is the mean over
thresholds, and the dataset score is the mean over images. Images with
neither ground truth nor predictions are excluded from that final mean;
images with predictions but no ground truth score zero.

Also here: binary-classification confusion metrics, seeded k-fold
splitting, and pointwise loss evaluation (smooth L1, binary cross-entropy,
and their weighted combination).
"""

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .formats import ScoreReport, ThresholdCounts
from .geometry import iou

__all__ = [
    "DEFAULT_THRESHOLDS",
    "MatchResult",
    "ConfusionCounts",
    "ClassificationMetrics",
    "match_boxes",
    "average_precision",
    "mean_average_precision",
    "score_dataset",
    "confusion_metrics",
    "kfold_split",
    "smooth_l1",
    "binary_cross_entropy",
    "total_loss",
    "threshold_range",
    "validate_thresholds",
]

DEFAULT_THRESHOLDS = (0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75)


def validate_thresholds(thresholds) -> tuple[float, ...]:
    """Check a threshold set: non-empty, strictly increasing, inside (0, 1)."""
    ts = tuple(float(t) for t in thresholds)
    if not ts:
        raise ValueError("threshold set must be non-empty")
    if any(not 0.0 < t < 1.0 for t in ts):
        raise ValueError(f"thresholds must lie in (0, 1): {ts}")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError(f"thresholds must be strictly increasing: {ts}")
    return ts


def threshold_range(lo: float, hi: float, step: float) -> tuple[float, ...]:
    """Thresholds lo, lo+step, ... up to hi inclusive (tolerant of float drift)."""
    if step <= 0:
        raise ValueError(f"step must be positive: {step!r}")
    values = []
    k = 0
    while True:
        v = round(lo + k * step, 10)
        if v > hi + 1e-9:
            break
        values.append(v)
        k += 1
    return validate_thresholds(values)


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching one image's predictions against its ground truth.

    ``matched_pairs`` holds (prediction index, ground-truth index, IoU)
    in match order; tp, fp, fn follow from it and the input sizes.
    """

    tp: int
    fp: int
    fn: int
    matched_pairs: tuple[tuple[int, int, float], ...]


def match_boxes(preds, gt, t: float, *, inclusive: bool = False) -> MatchResult:
    """Greedily match predictions to ground truth at IoU threshold ``t``.

    Predictions are processed in descending confidence order (ties keep
    input order); each takes the still-unmatched ground-truth box it
    overlaps most (ties go to the lowest index), provided that overlap
    exceeds ``t`` (or reaches it, with ``inclusive``). Every ground-truth
    box can be matched at most once, so duplicate predictions of the same
    box count as false positives.
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"threshold must lie in (0, 1): {t!r}")
    preds = list(preds)
    gt = list(gt)
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
    unmatched = list(range(len(gt)))
    pairs = []
    for pi in order:
        box = preds[pi].box
        best_gi = -1
        best_overlap = 0.0
        for gi in unmatched:
            overlap = iou(box, gt[gi])
            if overlap > best_overlap:
                best_overlap = overlap
                best_gi = gi
        hit = best_overlap >= t if inclusive else best_overlap > t
        if best_gi >= 0 and hit:
            unmatched.remove(best_gi)
            pairs.append((pi, best_gi, best_overlap))
    tp = len(pairs)
    return MatchResult(tp, len(preds) - tp, len(gt) - tp, tuple(pairs))


def average_precision(preds, gt, thresholds=DEFAULT_THRESHOLDS, *, inclusive: bool = False) -> float | None:
    """Per-image score: mean over thresholds of tp / (tp + fp + fn).

    Returns None when the image has neither predictions nor ground truth
    (such images are left out of the dataset mean), and 0.0 when there are
    predictions but nothing to find.
    """
    ts = validate_thresholds(thresholds)
    preds = list(preds)
    gt = list(gt)
    if not preds and not gt:
        return None
    if not gt:
        return 0.0
    total = 0.0
    for t in ts:
        m = match_boxes(preds, gt, t, inclusive=inclusive)
        total += m.tp / (m.tp + m.fp + m.fn)
    return total / len(ts)


def mean_average_precision(per_image) -> float:
    """Mean of the per-image scores that are present; 0.0 if none are."""
    present = [s for s in per_image if s is not None]
    if not present:
        return 0.0
    return sum(present) / len(present)


def score_dataset(
    gt_boxes,
    predictions,
    thresholds=DEFAULT_THRESHOLDS,
    *,
    inclusive: bool = False,
    workers: int = 1,
) -> ScoreReport:
    """Score a dataset and return the full report.

    ``gt_boxes`` maps image id -> ground-truth Boxes (empty for negative
    images); ``predictions`` maps image id -> Detections. Images are the
    union of both key sets, evaluated in sorted-id order so the report is
    identical regardless of input ordering or ``workers``; workers > 1 only
    fans the (pure) per-image evaluation out across a thread pool.
    """
    ts = validate_thresholds(thresholds)
    if workers < 1:
        raise ValueError(f"workers must be at least 1: {workers!r}")
    ids = sorted(set(gt_boxes) | set(predictions))

    def evaluate(image_id):
        preds = list(predictions.get(image_id, ()))
        gts = list(gt_boxes.get(image_id, ()))
        if not preds and not gts:
            return None, [(0, 0, 0)] * len(ts)
        matches = [match_boxes(preds, gts, t, inclusive=inclusive) for t in ts]
        score = sum(m.tp / (m.tp + m.fp + m.fn) for m in matches) / len(ts)
        return score, [(m.tp, m.fp, m.fn) for m in matches]

    if workers > 1 and len(ids) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, ids))
    else:
        results = [evaluate(image_id) for image_id in ids]

    per_image = tuple((image_id, score) for image_id, (score, _) in zip(ids, results))
    totals = [[0, 0, 0] for _ in ts]
    for _, counts in results:
        for ti, (tp, fp, fn) in enumerate(counts):
            totals[ti][0] += tp
            totals[ti][1] += fp
            totals[ti][2] += fn
    scores = [score for _, score in per_image]
    undefined = () if any(s is not None for s in scores) else ("dataset_map",)
    return ScoreReport(
        dataset_map=mean_average_precision(scores),
        thresholds=ts,
        per_image=per_image,
        counts=tuple(ThresholdCounts(t, *total) for t, total in zip(ts, totals)),
        undefined=undefined,
    )


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")


@dataclass(frozen=True)
class ClassificationMetrics:
    """The five headline classification metrics; any 0/0 ratio is reported
    as 0.0 and its name recorded in ``undefined``."""

    accuracy: float
    specificity: float
    precision: float
    recall: float
    f1: float
    undefined: tuple[str, ...] = ()


def confusion_metrics(c: ConfusionCounts) -> ClassificationMetrics:
    """Accuracy, specificity, precision, recall, and F1 from raw counts."""
    undefined = []

    def ratio(num, den, name):
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    accuracy = ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn, "accuracy")
    specificity = ratio(c.tn, c.tn + c.fp, "specificity")
    precision = ratio(c.tp, c.tp + c.fp, "precision")
    recall = ratio(c.tp, c.tp + c.fn, "recall")
    f1 = ratio(2.0 * precision * recall, precision + recall, "f1")
    return ClassificationMetrics(accuracy, specificity, precision, recall, f1, tuple(undefined))


def kfold_split(ids, k: int, seed: int) -> dict:
    """Deterministically partition ids into k folds of near-equal size.

    Ids are shuffled with a seeded RNG and dealt round-robin, so fold sizes
    differ by at most one and the same (ids, seed) always yields the same
    assignment. Duplicate ids are rejected.
    """
    ids = list(ids)
    if k < 2:
        raise ValueError(f"need at least 2 folds: {k!r}")
    if k > len(ids):
        raise ValueError(f"cannot split {len(ids)} ids into {k} folds")
    if len(set(ids)) != len(ids):
        raise ValueError("ids must be unique")
    shuffled = ids.copy()
    random.Random(seed).shuffle(shuffled)
    return {item: pos % k for pos, item in enumerate(shuffled)}


def smooth_l1(x: float, beta: float = 1.0) -> float:
    """Huber-style loss: quadratic inside |x| < beta, linear outside."""
    if not beta > 0:
        raise ValueError(f"beta must be positive: {beta!r}")
    ax = abs(x)
    if ax < beta:
        return 0.5 * x * x / beta
    return ax - 0.5 * beta


def binary_cross_entropy(p: float, y: int) -> float:
    """-[y ln p + (1-y) ln(1-p)]; p must lie strictly inside (0, 1)."""
    if y not in (0, 1):
        raise ValueError(f"label must be 0 or 1: {y!r}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie strictly inside (0, 1): {p!r}")
    return -math.log(p) if y == 1 else -math.log(1.0 - p)


def total_loss(cls_loss: float, reg_loss: float, reg_weight: float = 1.0) -> float:
    """Combined objective: classification plus weighted regression loss."""
    return cls_loss + reg_weight * reg_loss
