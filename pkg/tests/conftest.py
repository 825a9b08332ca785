"""Shared test helpers: random matcher instances and drawn image fixtures."""

import numpy as np
import pytest


def random_instance(rng, h, w, positive=False):
    """One (depth, gt, mask) triple with varied mask density and gt coverage."""
    depth = rng.normal(rng.uniform(-1.0, 2.0), rng.uniform(0.1, 1.5), (h, w))
    if positive:
        depth = np.abs(depth) + 1e-3
    mask = rng.random((h, w)) < rng.uniform(0.3, 1.0)
    if not mask.any():
        mask[h // 2, w // 2] = True
    gt = rng.random((h, w)) < rng.uniform(0.0, 0.7)
    return depth, gt, mask


def smooth_depth(h=64, w=48):
    """Smooth synthetic depth surface in [0, 1] with gentle ridges."""
    y, x = np.mgrid[0:h, 0:w]
    z = 0.5 + 0.25 * np.sin(2 * np.pi * x / w) * np.cos(2 * np.pi * y / h)
    z += 0.1 * np.sin(5 * np.pi * x / w)
    return np.clip(z, 0.0, 1.0)


def disk_mask(h, w, margin=4):
    y, x = np.mgrid[0:h, 0:w]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    r = min(h, w) / 2.0 - margin
    return (y - cy) ** 2 + (x - cx) ** 2 <= r * r


def draw_lab_print(h=140, w=90, seed=0):
    """Synthetic scanned lab print: orange ink tread blocks on white paper.

    Ink color sits inside the default hue window of the mask extractor
    (orange, high saturation) so the pipeline can run end to end.
    """
    rng = np.random.default_rng(seed)
    img = np.ones((h, w, 3))
    ink = np.array([0.85, 0.45, 0.10])  # orange: hue ~28 degrees
    blocks = [
        (10, 35, 15, 75),
        (45, 70, 10, 80),
        (80, 100, 15, 75),
        (110, 130, 25, 65),
    ]
    for r0, r1, c0, c1 in blocks:
        noise = rng.uniform(0.85, 1.0, (r1 - r0, c1 - c0, 1))
        img[r0:r1, c0:c1] = ink * noise
    # a few dropped pixels, like a patchy ink transfer
    holes = rng.random((h, w)) < 0.02
    img[holes] = 1.0
    return np.clip(img, 0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
