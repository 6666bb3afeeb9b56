"""Grayscale image preprocessing and box-aware augmentation.

Images are 2-D uint8 numpy arrays (height, width). Box coordinates live in
the continuous [0, width] x [0, height] frame where pixel (r, c) occupies
the unit square centered at (c + 0.5, r + 0.5).

CLAHE follows the classic tile scheme: one clipped, equalized histogram
mapping per tile, blended per pixel by bilinear interpolation between the
four nearest tile centers (edge tiles extend outward). With a single tile
and an infinite clip limit this degenerates to plain global histogram
equalization, mapping value v to round(cdf(v) * 255 / n_pixels).

Image resampling (resize, rotation, shift) is bilinear with the pixel-center
convention; samples outside the source read as 0 (black), matching the
radiograph background. PGM (binary P5, 8-bit) is the image interchange
format so fixtures stay bit-exact without codec dependencies.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Box

__all__ = [
    "AugmentSpec",
    "clahe",
    "resize",
    "scale_boxes",
    "augment",
    "encode_pgm",
    "decode_pgm",
    "read_pgm",
    "write_pgm",
]


def _as_gray(img) -> np.ndarray:
    a = np.asarray(img)
    if a.ndim != 2 or a.dtype != np.uint8:
        raise ValueError(f"expected a 2-D uint8 image, got {a.dtype} with shape {a.shape}")
    if a.size == 0:
        raise ValueError("image must be non-empty")
    return a


def _round_to_u8(values: np.ndarray) -> np.ndarray:
    # round half up, so the rule is direction-independent and deterministic
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


def _equalization_lut(hist: np.ndarray, n_pixels: int, clip_limit: float) -> np.ndarray:
    if math.isfinite(clip_limit):
        # ceiling is clip_limit times the height of a flat histogram
        ceiling = clip_limit * n_pixels / 256.0
        excess = np.clip(hist - ceiling, 0.0, None).sum()
        hist = np.minimum(hist, ceiling) + excess / 256.0
    cdf = np.cumsum(hist)
    return np.clip(np.floor(cdf * (255.0 / n_pixels) + 0.5), 0.0, 255.0)


def _blend_axis(n: int, edges: list[int]):
    """Neighbor tile indices and interpolation weight for each pixel index."""
    centers = np.array([(edges[t] + edges[t + 1] - 1) / 2.0 for t in range(len(edges) - 1)])
    pos = np.arange(n, dtype=float)
    hi = np.searchsorted(centers, pos, side="right")
    lo = np.clip(hi - 1, 0, len(centers) - 1)
    hi = np.clip(hi, 0, len(centers) - 1)
    span = centers[hi] - centers[lo]
    weight = np.where(span > 0, (pos - centers[lo]) / np.where(span > 0, span, 1.0), 0.0)
    return lo, hi, np.clip(weight, 0.0, 1.0)


def clahe(img, tiles_x: int = 8, tiles_y: int = 8, clip_limit: float = 2.0) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization.

    ``clip_limit`` is a multiple of the flat-histogram bin height; clipped
    excess is redistributed uniformly over all 256 bins in a single pass.
    Pass ``math.inf`` to disable clipping. The image must be at least
    tiles_x pixels wide and tiles_y pixels tall.
    """
    img = _as_gray(img)
    h, w = img.shape
    if tiles_x < 1 or tiles_y < 1:
        raise ValueError(f"tile grid must be at least 1x1, got {tiles_x}x{tiles_y}")
    if not clip_limit > 0:
        raise ValueError(f"clip limit must be positive: {clip_limit!r}")
    if w < tiles_x or h < tiles_y:
        raise ValueError(f"{w}x{h} image too small for a {tiles_x}x{tiles_y} tile grid")

    x_edges = [(t * w) // tiles_x for t in range(tiles_x + 1)]
    y_edges = [(t * h) // tiles_y for t in range(tiles_y + 1)]
    luts = np.empty((tiles_y, tiles_x, 256))
    for ty in range(tiles_y):
        for tx in range(tiles_x):
            tile = img[y_edges[ty] : y_edges[ty + 1], x_edges[tx] : x_edges[tx + 1]]
            hist = np.bincount(tile.ravel(), minlength=256).astype(float)
            luts[ty, tx] = _equalization_lut(hist, tile.size, clip_limit)

    ty0, ty1, wy = _blend_axis(h, y_edges)
    tx0, tx1, wx = _blend_axis(w, x_edges)
    m00 = luts[ty0[:, None], tx0[None, :], img]
    m01 = luts[ty0[:, None], tx1[None, :], img]
    m10 = luts[ty1[:, None], tx0[None, :], img]
    m11 = luts[ty1[:, None], tx1[None, :], img]
    wy = wy[:, None]
    wx = wx[None, :]
    blended = (1.0 - wy) * ((1.0 - wx) * m00 + wx * m01) + wy * ((1.0 - wx) * m10 + wx * m11)
    return _round_to_u8(blended)


def resize(img, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resize with pixel-center sampling (no corner alignment)."""
    img = _as_gray(img)
    h, w = img.shape
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output size must be at least 1x1, got {out_w}x{out_h}")
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1.0)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[None, :]
    fy = (ys - y0)[:, None]
    v00 = img[y0[:, None], x0[None, :]].astype(float)
    v01 = img[y0[:, None], x1[None, :]].astype(float)
    v10 = img[y1[:, None], x0[None, :]].astype(float)
    v11 = img[y1[:, None], x1[None, :]].astype(float)
    values = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11)
    return _round_to_u8(values)


def scale_boxes(boxes, sx: float, sy: float) -> list[Box]:
    """Scale box coordinates componentwise (e.g. to track a resize)."""
    if not (sx > 0 and sy > 0):
        raise ValueError(f"scale factors must be positive: {sx!r}, {sy!r}")
    return [Box(b.x_min * sx, b.y_min * sy, b.x_max * sx, b.y_max * sy) for b in boxes]


@dataclass(frozen=True)
class AugmentSpec:
    """One deterministic augmentation: rotate about the image center by
    ``rotation_deg`` (positive turns x toward y, i.e. clockwise on screen),
    shift by whole-image pixels, then mirror horizontally."""

    rotation_deg: float = 0.0
    shift_x: float = 0.0
    shift_y: float = 0.0
    hflip: bool = False

    def __post_init__(self):
        for v in (self.rotation_deg, self.shift_x, self.shift_y):
            if not math.isfinite(v):
                raise ValueError(f"augmentation parameters must be finite: {self!r}")

    @property
    def is_identity(self) -> bool:
        return self.rotation_deg == 0.0 and self.shift_x == 0.0 and self.shift_y == 0.0 and not self.hflip


def _forward_affine(spec: AugmentSpec, w: int, h: int):
    """Coefficients of p -> A p + b mapping source to output coordinates."""
    theta = math.radians(spec.rotation_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    a11, a12, a21, a22 = cos_t, -sin_t, sin_t, cos_t
    cx, cy = w / 2.0, h / 2.0
    bx = cx - (a11 * cx + a12 * cy) + spec.shift_x
    by = cy - (a21 * cx + a22 * cy) + spec.shift_y
    if spec.hflip:
        a11, a12, bx = -a11, -a12, w - bx
    return a11, a12, a21, a22, bx, by


def _sample_bilinear_zero(img: np.ndarray, x_idx: np.ndarray, y_idx: np.ndarray) -> np.ndarray:
    """Bilinear sample at fractional pixel indices; outside reads as 0."""
    h, w = img.shape
    x0 = np.floor(x_idx).astype(int)
    y0 = np.floor(y_idx).astype(int)
    fx = x_idx - x0
    fy = y_idx - y0
    acc = np.zeros(x_idx.shape)
    for dy in (0, 1):
        for dx in (0, 1):
            xi = x0 + dx
            yi = y0 + dy
            weight = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            vals = img[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)].astype(float)
            acc += weight * np.where(valid, vals, 0.0)
    return _round_to_u8(acc)


def augment(img, boxes, spec: AugmentSpec):
    """Apply rotation, shift, and horizontal flip to an image and its boxes.

    Returns (image, boxes). Each box becomes the axis-aligned hull of its
    four transformed corners, clipped to the image; boxes pushed entirely
    off the image are dropped. Exposed pixels are zero-filled.
    """
    img = _as_gray(img)
    h, w = img.shape
    a11, a12, a21, a22, bx, by = _forward_affine(spec, w, h)

    new_boxes = []
    for box in boxes:
        corners = (
            (box.x_min, box.y_min),
            (box.x_max, box.y_min),
            (box.x_min, box.y_max),
            (box.x_max, box.y_max),
        )
        xs = [a11 * x + a12 * y + bx for x, y in corners]
        ys = [a21 * x + a22 * y + by for x, y in corners]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        if x_hi < 0 or x_lo > w or y_hi < 0 or y_lo > h:
            continue
        new_boxes.append(
            Box(max(x_lo, 0.0), max(y_lo, 0.0), min(x_hi, float(w)), min(y_hi, float(h)))
        )

    if spec.is_identity:
        return img.copy(), new_boxes

    # invert analytically; rotations and flips keep |det| at 1
    det = a11 * a22 - a12 * a21
    i11, i12 = a22 / det, -a12 / det
    i21, i22 = -a21 / det, a11 / det
    out_x = (np.arange(w) + 0.5)[None, :] - bx
    out_y = (np.arange(h) + 0.5)[:, None] - by
    src_x = i11 * out_x + i12 * out_y
    src_y = i21 * out_x + i22 * out_y
    out = _sample_bilinear_zero(img, src_x - 0.5, src_y - 0.5)
    return out, new_boxes


def encode_pgm(img) -> bytes:
    """Serialize an image as binary PGM (P5, maxval 255)."""
    img = _as_gray(img)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def decode_pgm(data: bytes) -> np.ndarray:
    """Parse a binary PGM; accepts comments and any header whitespace."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        if pos >= len(data):
            raise ValueError("truncated PGM header")
        ch = data[pos : pos + 1]
        if ch in b" \t\r\n":
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        else:
            end = pos
            while end < len(data) and data[end : end + 1] not in b" \t\r\n#":
                end += 1
            tokens.append(data[pos:end])
            pos = end
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM (magic {tokens[0]!r})")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ValueError(f"non-numeric PGM header fields: {tokens[1:]}") from None
    if w < 1 or h < 1:
        raise ValueError(f"PGM dimensions must be positive, got {w}x{h}")
    if not 1 <= maxval <= 255:
        raise ValueError(f"only 8-bit PGM supported, got maxval {maxval}")
    pos += 1  # single whitespace byte separates header from raster
    raster = data[pos:]
    if len(raster) != w * h:
        raise ValueError(f"expected {w * h} raster bytes, got {len(raster)}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w).copy()


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_pgm(fh.read())


def write_pgm(path, img) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img))
