"""The proposal side of a two-stage detector, end to end on toy data:
tile anchors over a feature-map grid, label them against ground truth,
regress a positive anchor onto its box, and select final proposals.
"""

from cxrdet import (
    AnchorSpec,
    Box,
    decode_box,
    encode_box,
    generate_anchors,
    label_anchors,
    select_proposals,
)

spec = AnchorSpec(base_size=16, scales=(4, 8), ratios=(0.5, 1.0, 2.0), stride=16)
anchors = generate_anchors(spec, grid_w=4, grid_h=4)
print(f"{len(anchors)} anchors = 4x4 cells x {spec.anchors_per_cell} shapes per cell")
print("first cell's anchors (w x h):")
for a in anchors[: spec.anchors_per_cell]:
    print(f"  {a.width:7.1f} x {a.height:7.1f} centered at {a.center}")

gt = [Box(20, 20, 60, 50), Box(5, 5, 12, 12)]
labels = label_anchors(anchors, gt, pos_iou=0.7, neg_iou=0.3)
kinds = [lab.kind for lab in labels]
print()
print("labels against two ground-truth boxes:",
      {k: kinds.count(k) for k in ("positive", "negative", "ignore")})
print("(every overlapped box keeps at least one positive anchor even when")
print(" nothing reaches the 0.7 threshold: the force-match rule)")

best = next(i for i, lab in enumerate(labels) if lab.is_positive)
delta = encode_box(anchors[best], gt[labels[best].gt_index])
print()
print(f"anchor {best} regresses onto gt {labels[best].gt_index} via offsets")
print(f"  tx={delta.tx:+.3f} ty={delta.ty:+.3f} tw={delta.tw:+.3f} th={delta.th:+.3f}")
print("  decoded back:", decode_box(anchors[best], delta))

scores = [0.02 + 0.9 * (lab.is_positive) for lab in labels]
proposals = select_proposals(
    anchors, scores, image_w=64, image_h=64, pre_top_n=50, post_top_n=5, nms_iou=0.5
)
print()
print(f"{len(proposals)} proposals after clipping, size filtering, and hard NMS:")
for p in proposals:
    print(f"  score {p.score:.2f}  {p.box}")
