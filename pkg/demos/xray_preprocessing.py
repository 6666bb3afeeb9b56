"""Preprocessing a synthetic low-contrast radiograph-like image:
contrast-limited adaptive histogram equalization, resizing to the network
input size (boxes rescaled alongside), and box-aware augmentation.

Writes before/after images as binary PGM next to a temp directory so they
can be eyeballed with any image viewer.
"""

import tempfile
from pathlib import Path

import numpy as np

from cxrdet import AugmentSpec, Box, augment, clahe, resize, scale_boxes, write_pgm

rng = np.random.default_rng(7)

# murky phantom: dim background, a brighter "ribcage" band, a faint blob
img = (40 + 12 * rng.random((256, 256))).astype(np.uint8)
yy, xx = np.mgrid[0:256, 0:256]
img[(yy > 60) & (yy < 200)] += 25
blob = ((xx - 170) ** 2 + (yy - 120) ** 2) < 30**2
img[blob] = np.minimum(img[blob] + 18, 255).astype(np.uint8)
finding = Box(140, 90, 200, 150)

print(f"raw image: intensities {img.min()}..{img.max()} (low contrast)")

equalized = clahe(img, tiles_x=8, tiles_y=8, clip_limit=2.0)
print(f"after CLAHE: intensities {equalized.min()}..{equalized.max()}")

small = resize(equalized, 128, 128)
(small_box,) = scale_boxes([finding], 128 / 256, 128 / 256)
print(f"resized to {small.shape[1]}x{small.shape[0]}; box follows: {small_box}")

spec = AugmentSpec(rotation_deg=8.0, shift_x=5.0, shift_y=-3.0, hflip=True)
augmented, boxes = augment(small, [small_box], spec)
print(f"augmented with {spec}")
print(f"box after augmentation (hull of rotated corners, clipped): {boxes[0]}")

out_dir = Path(tempfile.mkdtemp(prefix="cxr_demo_"))
write_pgm(out_dir / "raw.pgm", img)
write_pgm(out_dir / "clahe.pgm", equalized)
write_pgm(out_dir / "augmented.pgm", augmented)
print(f"wrote raw.pgm, clahe.pgm, augmented.pgm under {out_dir}")
