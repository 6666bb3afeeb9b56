"""Box basics: corner-form boxes, areas, overlaps, and IoU.

IoU (intersection over union) is the overlap area divided by the combined
area and is the matching currency for everything else in the package. For
integer boxes it equals a unit-cell count, which this demo verifies by
brute force on a small grid.
"""

import numpy as np

from cxrdet import Box, area, intersection_area, iou

a = Box(0, 0, 2, 2)
b = Box(1, 1, 3, 3)

print("box a:", a)
print("box b:", b)
print("area(a) =", area(a))
print("intersection =", intersection_area(a, b))
print("iou =", iou(a, b), "(exactly 1/7: they share 1 of 7 covered cells)")

# cross-check by rasterizing both boxes onto a pixel grid
grid_a = np.zeros((4, 4), dtype=bool)
grid_b = np.zeros((4, 4), dtype=bool)
grid_a[0:2, 0:2] = True
grid_b[1:3, 1:3] = True
cells = (grid_a & grid_b).sum() / (grid_a | grid_b).sum()
print("cell-count check =", cells)

print()
print("degenerate boxes are allowed but never match anything:")
flat = Box(5, 5, 5, 9)
print("area of a zero-width box:", area(flat))
print("iou of two zero-area boxes:", iou(Box(1, 1, 1, 1), Box(1, 1, 1, 1)))

print()
print("the annotation files store (x, y, width, height); conversion is exact:")
box = Box.from_xywh(10, 20, 30, 40)
print("from_xywh(10, 20, 30, 40) ->", box)
print("back:", box.to_xywh())
