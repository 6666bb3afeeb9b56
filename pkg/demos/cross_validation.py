"""Patient-level evaluation plumbing: a seeded 5-fold split plus the
confusion-matrix metrics used to report per-image (opacity present/absent)
classification, and the loss values tracked while training.
"""

from cxrdet import (
    ConfusionCounts,
    binary_cross_entropy,
    confusion_metrics,
    kfold_split,
    smooth_l1,
    total_loss,
)

patients = [f"patient_{i:03d}" for i in range(23)]
folds = kfold_split(patients, k=5, seed=42)
for k in range(5):
    members = [p for p, f in folds.items() if f == k]
    print(f"fold {k}: {len(members)} patients, e.g. {members[:3]}")
print("same seed, same split:", kfold_split(patients, k=5, seed=42) == folds)

print()
print("confusion metrics for a fold's binary predictions:")
counts = ConfusionCounts(tp=41, fp=4, tn=47, fn=3)
m = confusion_metrics(counts)
print(f"  accuracy    {m.accuracy:.4f}")
print(f"  specificity {m.specificity:.4f}")
print(f"  precision   {m.precision:.4f}")
print(f"  recall      {m.recall:.4f}")
print(f"  f1          {m.f1:.4f}")

print()
print("loss bookkeeping (pointwise values, no autograd here):")
cls = binary_cross_entropy(0.8, 1)  # confident correct objectness
reg = sum(smooth_l1(x, beta=1.0) for x in (0.1, -0.4, 0.02, 0.3))
print(f"  classification loss {cls:.4f}")
print(f"  regression loss     {reg:.4f}")
print(f"  total               {total_loss(cls, reg):.4f}")
