"""Seeded random-input generators shared across test modules."""

from cxrdet import Box, Detection


def random_int_box(rng, hi=64) -> Box:
    """Integer-coordinate box in [0, hi]^2; may be degenerate."""
    x0, x1 = sorted(rng.randint(0, hi) for _ in range(2))
    y0, y1 = sorted(rng.randint(0, hi) for _ in range(2))
    return Box(float(x0), float(y0), float(x1), float(y1))


def random_positive_box(rng, hi=100.0, min_side=0.5) -> Box:
    """Float box with both sides at least min_side, inside [0, hi]^2."""
    w = rng.uniform(min_side, hi / 2)
    h = rng.uniform(min_side, hi / 2)
    x0 = rng.uniform(0.0, hi - w)
    y0 = rng.uniform(0.0, hi - h)
    return Box(x0, y0, x0 + w, y0 + h)


def random_detections(rng, n, hi=40, classes=(None,)) -> list[Detection]:
    """Crowded small-board detections; scores quantized so ties occur."""
    dets = []
    for _ in range(n):
        box = random_int_box(rng, hi=hi)
        score = round(rng.random(), 2)
        dets.append(Detection(box, score, rng.choice(classes)))
    return dets
