import math
import random

import pytest

from cxrdet import (
    DEFAULT_THRESHOLDS,
    Box,
    ClassificationMetrics,
    ConfusionCounts,
    Detection,
    average_precision,
    binary_cross_entropy,
    confusion_metrics,
    kfold_split,
    match_boxes,
    mean_average_precision,
    score_dataset,
    smooth_l1,
    threshold_range,
    total_loss,
)
from cxrdet.metrics import validate_thresholds
from helpers import random_positive_box
from oracles import greedy_consistent_assignments


def det(box, score):
    return Detection(box, score)


class TestThresholds:
    def test_default_set(self):
        assert DEFAULT_THRESHOLDS == (0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75)

    def test_range_builder(self):
        assert threshold_range(0.4, 0.75, 0.05) == DEFAULT_THRESHOLDS
        assert threshold_range(0.5, 0.5, 0.1) == (0.5,)

    @pytest.mark.parametrize("bad", [(), (0.5, 0.5), (0.7, 0.4), (0.0, 0.5), (0.5, 1.0)])
    def test_invalid_sets(self, bad):
        with pytest.raises(ValueError):
            validate_thresholds(bad)


class TestMatchBoxes:
    def test_exact_copy_matches(self):
        gt = [Box(0, 0, 10, 10)]
        m = match_boxes([det(gt[0], 0.9)], gt, 0.5)
        assert (m.tp, m.fp, m.fn) == (1, 0, 0)
        assert m.matched_pairs == ((0, 0, 1.0),)

    def test_duplicate_prediction_is_false_positive(self):
        gt = [Box(0, 0, 10, 10)]
        preds = [det(gt[0], 0.9), det(gt[0], 0.8)]
        m = match_boxes(preds, gt, 0.5)
        assert (m.tp, m.fp, m.fn) == (1, 1, 0)
        assert m.matched_pairs == ((0, 0, 1.0),)

    def test_unmatched_truth_is_false_negative(self):
        m = match_boxes([], [Box(0, 0, 10, 10)], 0.5)
        assert (m.tp, m.fp, m.fn) == (0, 0, 1)

    def test_strict_threshold_by_default(self):
        gt = [Box(0, 0, 10, 10)]
        pred = det(Box(0, 0, 10, 5), 0.9)  # IoU exactly 0.5
        assert match_boxes([pred], gt, 0.5).tp == 0
        assert match_boxes([pred], gt, 0.5, inclusive=True).tp == 1

    def test_confidence_order_decides_who_matches(self):
        gt = [Box(0, 0, 10, 10)]
        low_first = [det(Box(0, 0, 10, 9), 0.3), det(gt[0], 0.9)]
        m = match_boxes(low_first, gt, 0.5)
        assert m.matched_pairs == ((1, 0, 1.0),)

    def test_equal_overlap_takes_the_lowest_gt_index(self):
        # the prediction overlaps both halves identically (IoU 0.5 each)
        gt = [Box(0, 0, 10, 5), Box(0, 5, 10, 10)]
        m = match_boxes([det(Box(0, 0, 10, 10), 0.9)], gt, 0.4)
        assert m.matched_pairs == ((0, 0, 0.5),)

    def test_counts_always_consistent(self):
        rng = random.Random(43)
        for _ in range(100):
            preds = [det(random_positive_box(rng), round(rng.random(), 2)) for _ in range(rng.randint(0, 8))]
            gts = [random_positive_box(rng) for _ in range(rng.randint(0, 8))]
            m = match_boxes(preds, gts, 0.5)
            assert m.tp + m.fp == len(preds)
            assert m.tp + m.fn == len(gts)
            assert m.tp == len(m.matched_pairs)

    def test_agrees_with_assignment_enumeration_oracle(self):
        rng = random.Random(47)
        for _ in range(60):
            n, m_ = rng.randint(0, 4), rng.randint(0, 4)
            pred_boxes = [random_positive_box(rng, hi=20, min_side=2) for _ in range(n)]
            scores = [round(rng.random(), 1) for _ in range(n)]
            gt_boxes = [random_positive_box(rng, hi=20, min_side=2) for _ in range(m_)]
            t = rng.choice([0.2, 0.4, 0.6])
            result = match_boxes([det(b, s) for b, s in zip(pred_boxes, scores)], gt_boxes, t)
            coords = [(b.x_min, b.y_min, b.x_max, b.y_max) for b in pred_boxes]
            gcoords = [(b.x_min, b.y_min, b.x_max, b.y_max) for b in gt_boxes]
            consistent = greedy_consistent_assignments(coords, scores, gcoords, t)
            assert len(consistent) == 1
            assert dict((pi, gi) for pi, gi, _ in result.matched_pairs) == consistent[0]

    def test_scale_invariance(self):
        rng = random.Random(53)
        for _ in range(30):
            preds = [det(random_positive_box(rng), round(rng.random(), 2)) for _ in range(rng.randint(0, 6))]
            gts = [random_positive_box(rng) for _ in range(rng.randint(0, 6))]
            factor = rng.choice([0.25, 3.0, 17.5])
            scaled_preds = [
                det(Box(d.box.x_min * factor, d.box.y_min * factor,
                        d.box.x_max * factor, d.box.y_max * factor), d.score)
                for d in preds
            ]
            scaled_gts = [Box(g.x_min * factor, g.y_min * factor, g.x_max * factor, g.y_max * factor) for g in gts]
            a = match_boxes(preds, gts, 0.5)
            b = match_boxes(scaled_preds, scaled_gts, 0.5)
            assert (a.tp, a.fp, a.fn) == (b.tp, b.fp, b.fn)
            assert average_precision(preds, gts) == average_precision(scaled_preds, scaled_gts)


class TestAveragePrecision:
    def test_both_empty_is_excluded(self):
        assert average_precision([], []) is None

    def test_predictions_without_truth_score_zero(self):
        preds = [det(Box(0, 0, 5, 5), 0.9)] * 3
        assert average_precision(preds, []) == 0.0

    def test_exact_match_scores_one(self):
        gt = [Box(0, 0, 10, 10)]
        assert average_precision([det(gt[0], 1.0)], gt) == 1.0

    def test_missing_predictions_score_zero(self):
        assert average_precision([], [Box(0, 0, 10, 10)]) == 0.0

    def test_single_threshold_value(self):
        gt = [Box(0, 0, 10, 10), Box(50, 50, 60, 60)]
        preds = [det(gt[0], 0.9), det(Box(80, 80, 90, 90), 0.8)]
        # one TP, one FP, one FN at every threshold: 1 / 3
        assert average_precision(preds, gt) == pytest.approx(1 / 3)

    def test_monotone_in_thresholds(self):
        rng = random.Random(59)
        for _ in range(50):
            preds = [det(random_positive_box(rng), round(rng.random(), 2)) for _ in range(rng.randint(1, 6))]
            gts = [random_positive_box(rng) for _ in range(rng.randint(1, 6))]
            base = (0.3, 0.5)
            extended = (0.3, 0.5, 0.8)
            lo = average_precision(preds, gts, extended)
            hi = average_precision(preds, gts, base)
            assert lo <= hi + 1e-12


class TestDatasetMean:
    def test_plain_mean(self):
        assert mean_average_precision([1.0, 0.0]) == 0.5

    def test_absent_images_excluded(self):
        assert mean_average_precision([None, 1.0]) == 1.0

    def test_empty_mean_is_zero(self):
        assert mean_average_precision([]) == 0.0
        assert mean_average_precision([None, None]) == 0.0


class TestScoreDataset:
    def test_report_fields(self):
        gt = {"a": [Box(0, 0, 10, 10)], "b": [], "c": []}
        preds = {"a": [det(Box(0, 0, 10, 10), 1.0)], "b": [det(Box(5, 5, 9, 9), 0.5)]}
        report = score_dataset(gt, preds, (0.5,))
        assert [pid for pid, _ in report.per_image] == ["a", "b", "c"]
        assert dict(report.per_image) == {"a": 1.0, "b": 0.0, "c": None}
        assert report.dataset_map == 0.5
        assert report.counts[0].threshold == 0.5
        assert (report.counts[0].tp, report.counts[0].fp, report.counts[0].fn) == (1, 1, 0)
        assert report.undefined == ()

    def test_all_absent_flags_undefined(self):
        report = score_dataset({"a": []}, {}, (0.5,))
        assert report.dataset_map == 0.0
        assert report.undefined == ("dataset_map",)

    def test_workers_do_not_change_the_report(self):
        rng = random.Random(61)
        gt = {}
        preds = {}
        for i in range(40):
            pid = f"p{i:03d}"
            gt[pid] = [random_positive_box(rng) for _ in range(rng.randint(0, 3))]
            preds[pid] = [det(random_positive_box(rng), round(rng.random(), 3)) for _ in range(rng.randint(0, 4))]
        assert score_dataset(gt, preds, workers=1) == score_dataset(gt, preds, workers=8)

    def test_perfect_predictions_score_one(self):
        rng = random.Random(67)
        gt = {f"p{i}": [random_positive_box(rng) for _ in range(rng.randint(1, 3))] for i in range(10)}
        preds = {pid: [det(b, 1.0) for b in boxes] for pid, boxes in gt.items()}
        assert score_dataset(gt, preds).dataset_map == 1.0


class TestConfusionMetrics:
    def test_perfect_classifier(self):
        m = confusion_metrics(ConfusionCounts(tp=10, fp=0, tn=10, fn=0))
        assert m == ClassificationMetrics(1.0, 1.0, 1.0, 1.0, 1.0, ())

    def test_worked_example(self):
        m = confusion_metrics(ConfusionCounts(tp=8, fp=2, tn=9, fn=1))
        assert m.accuracy == pytest.approx(0.85, abs=1e-4)
        assert m.precision == pytest.approx(0.8, abs=1e-4)
        assert m.recall == pytest.approx(0.8889, abs=1e-4)
        assert m.specificity == pytest.approx(0.8182, abs=1e-4)
        assert m.f1 == pytest.approx(0.8421, abs=1e-4)
        assert m.undefined == ()

    def test_zero_over_zero_is_flagged(self):
        m = confusion_metrics(ConfusionCounts(tp=0, fp=0, tn=5, fn=5))
        assert m.precision == 0.0
        assert m.recall == 0.0
        assert m.accuracy == 0.5
        assert "precision" in m.undefined and "f1" in m.undefined
        assert "recall" not in m.undefined

    def test_values_stay_in_unit_interval(self):
        rng = random.Random(71)
        for _ in range(200):
            counts = ConfusionCounts(*(rng.randint(0, 3) for _ in range(4)))
            m = confusion_metrics(counts)
            for v in (m.accuracy, m.specificity, m.precision, m.recall, m.f1):
                assert 0.0 <= v <= 1.0

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionCounts(tp=-1, fp=0, tn=0, fn=0)


class TestKfold:
    def test_even_split(self):
        ids = [f"p{i}" for i in range(10)]
        folds = kfold_split(ids, 5, seed=7)
        assert set(folds) == set(ids)
        sizes = [sum(1 for f in folds.values() if f == k) for k in range(5)]
        assert sizes == [2, 2, 2, 2, 2]

    def test_deterministic(self):
        ids = [f"p{i}" for i in range(23)]
        assert kfold_split(ids, 5, seed=123) == kfold_split(ids, 5, seed=123)
        assert kfold_split(ids, 5, seed=123) != kfold_split(ids, 5, seed=124)

    def test_uneven_split_sizes(self):
        folds = kfold_split([f"p{i}" for i in range(11)], 5, seed=1)
        sizes = sorted(sum(1 for f in folds.values() if f == k) for k in range(5))
        assert sizes == [2, 2, 2, 2, 3]

    @pytest.mark.parametrize("ids,k", [(list("abc"), 4), (list("abc"), 1), (list("aab"), 2)])
    def test_invalid_requests(self, ids, k):
        with pytest.raises(ValueError):
            kfold_split(ids, k, seed=0)


class TestLosses:
    def test_smooth_l1_values(self):
        assert smooth_l1(0, 1) == 0.0
        assert smooth_l1(0.5, 1) == 0.125
        assert smooth_l1(2, 1) == 1.5

    def test_smooth_l1_continuous_at_beta(self):
        for beta in (0.5, 1.0, 3.0):
            inside = smooth_l1(beta * (1 - 1e-12), beta)
            outside = smooth_l1(beta, beta)
            assert inside == pytest.approx(0.5 * beta, rel=1e-9)
            assert outside == pytest.approx(0.5 * beta, rel=1e-9)

    def test_smooth_l1_nonnegative_and_symmetric(self):
        rng = random.Random(73)
        for _ in range(200):
            x = rng.uniform(-10, 10)
            beta = rng.uniform(0.1, 5)
            assert smooth_l1(x, beta) >= 0.0
            assert smooth_l1(x, beta) == smooth_l1(-x, beta)

    def test_smooth_l1_needs_positive_beta(self):
        with pytest.raises(ValueError):
            smooth_l1(1.0, 0.0)

    def test_bce_values(self):
        assert binary_cross_entropy(0.5, 1) == pytest.approx(math.log(2), abs=1e-12)
        assert binary_cross_entropy(0.5, 0) == pytest.approx(math.log(2), abs=1e-12)
        assert binary_cross_entropy(0.9, 1) == pytest.approx(-math.log(0.9), abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.1])
    def test_bce_domain(self, p):
        with pytest.raises(ValueError):
            binary_cross_entropy(p, 1)

    def test_bce_label_domain(self):
        with pytest.raises(ValueError):
            binary_cross_entropy(0.5, 2)

    def test_total_loss(self):
        assert total_loss(1.0, 2.0) == 3.0
        assert total_loss(1.0, 2.0, reg_weight=0.5) == 2.0
