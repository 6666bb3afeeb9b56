"""Hard NMS versus the two soft decay modes on a crowded scene.

Hard suppression deletes every detection that overlaps a kept one beyond
the threshold. Soft suppression keeps them but decays their scores, either
linearly in the overlap or with a gaussian in the overlap squared, and only
drops a detection once its decayed score falls under the cutoff.
"""

from cxrdet import HARD, SOFT_GAUSSIAN, SOFT_LINEAR, Box, Detection, NmsConfig, nms

scene = [
    Detection(Box(0, 0, 10, 10), 0.90),   # the winner
    Detection(Box(1, 0, 11, 10), 0.85),   # heavy overlap with the winner
    Detection(Box(6, 0, 16, 10), 0.60),   # partial overlap
    Detection(Box(30, 30, 40, 40), 0.55), # far away, untouched
]

print(f"{'mode':<14} {'kept':>4}  surviving scores")
for mode in (HARD, SOFT_LINEAR, SOFT_GAUSSIAN):
    out = nms(scene, NmsConfig(mode=mode, iou_threshold=0.5, sigma=0.5))
    scores = ", ".join(f"{d.score:.4f}" for d in out)
    print(f"{mode:<14} {len(out):>4}  {scores}")

print()
print("identical boxes, gaussian sigma 0.5: the runner-up decays by e^-2")
pair = [Detection(Box(0, 0, 10, 10), 0.9), Detection(Box(0, 0, 10, 10), 0.8)]
for d in nms(pair, NmsConfig(mode=SOFT_GAUSSIAN, sigma=0.5)):
    print("  score:", d.score)

print()
print("detections of different classes never suppress each other:")
multi = [Detection(Box(0, 0, 10, 10), 0.9, class_id=0),
         Detection(Box(0, 0, 10, 10), 0.8, class_id=1)]
print(" ", nms(multi, NmsConfig(mode=HARD)))
