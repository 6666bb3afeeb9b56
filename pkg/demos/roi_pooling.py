"""RoI max pooling: squash any rectangular region of a feature map into a
fixed grid by taking per-bin maxima. Bin edges follow a floor/ceil rule, so
a region that doesn't divide evenly still fills every bin (neighboring bins
then share a boundary cell).
"""

import numpy as np

from cxrdet import Box, roi_max_pool

fm = np.arange(1, 17, dtype=float).reshape(4, 4)
print("feature map:")
print(fm)
print()
print("whole map pooled to 2x2 (max of each quadrant):")
print(roi_max_pool(fm, Box(0, 0, 4, 4), 2, 2))

print()
print("a 5-cell row pooled into 2 bins: spans {0,1,2} and {2,3,4}")
row = np.array([[1.0, 2.0, 9.0, 3.0, 4.0]])
print("row:", row[0], "->", roi_max_pool(row, Box(0, 0, 5, 1), 2, 1)[0])
print("(cell 2 sits on the shared boundary, so both bins see the 9)")

print()
print("fractional regions snap outward to whole cells:")
print(roi_max_pool(fm, Box(0.4, 0.4, 2.3, 2.3), 1, 1), "= max of cells [0..3) x [0..3)")

print()
print("multi-channel maps pool each channel independently:")
stack = np.stack([fm, fm * -1])
print(roi_max_pool(stack, Box(0, 0, 4, 4), 2, 2))
