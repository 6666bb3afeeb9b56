"""Scoring detections the way the chest X-ray competition does.

Per image and per IoU threshold, predictions greedily match ground truth
in confidence order and the image earns tp / (tp + fp + fn); the image
score is the mean over thresholds and the dataset score the mean over
images. Images with no boxes on either side are left out of the mean;
false positives on an empty image pin it to zero.
"""

from cxrdet import (
    Box,
    Detection,
    average_precision,
    match_boxes,
    score_dataset,
    write_report,
)

gt = {
    "clean":   [],                                        # healthy, no findings
    "hit":     [Box(100, 100, 200, 220)],                 # one opacity, found
    "partial": [Box(50, 50, 150, 150), Box(300, 300, 400, 380)],
    "spurious": [],                                       # healthy but flagged
}
preds = {
    "hit":     [Detection(Box(100, 100, 200, 220), 0.95)],
    "partial": [Detection(Box(55, 60, 148, 155), 0.9),    # good overlap
                Detection(Box(0, 0, 40, 40), 0.6)],       # miss
    "spurious": [Detection(Box(10, 10, 60, 60), 0.4)],
}

for pid in sorted(gt):
    score = average_precision(preds.get(pid, []), gt[pid])
    shown = "excluded (nothing to score)" if score is None else f"{score:.4f}"
    print(f"image {pid:<9} -> {shown}")

print()
m = match_boxes(preds["partial"], gt["partial"], t=0.5)
print(f"'partial' at threshold 0.5: tp={m.tp} fp={m.fp} fn={m.fn}")
print("matched pairs (pred, gt, iou):", [(p, g, round(v, 3)) for p, g, v in m.matched_pairs])

report = score_dataset(gt, preds)
print()
print(f"dataset mAP over thresholds 0.40..0.75: {report.dataset_map:.6f}")
print()
print("full JSON report:")
print(write_report(report))
