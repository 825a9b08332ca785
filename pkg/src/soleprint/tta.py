"""Test-time augmentation plumbing for an external depth predictor.

Expands an input image into the 23 canonical variants (3 flips, 4
rotations, 4 scalings, 12 flip+rotation combinations), and merges the 24
returned depth maps (original + variants) back into one prediction by
per-pixel averaging over the inverse-transformed maps. Scaling variants
are produced at scaled resolution and resampled back on merge; rotation
inverse-transforms exclude out-of-support pixels from the average.
"""

from __future__ import annotations

from collections import Counter

import numpy as np
from skimage.transform import resize

from .transforms import TransformSpec, geom_transform, transform_mask

__all__ = ["canonical_specs", "make_variants", "merge_predictions"]

_ANGLES = (5.0, 10.0, -5.0, -10.0)
_SCALES = (0.5, 0.8, 1.5, 1.8)
_FLIPS = ("h", "v", "hv")


def canonical_specs() -> list[TransformSpec]:
    """The 23 variant transforms in their canonical, stable order."""
    specs = [TransformSpec(flip=f) for f in _FLIPS]
    specs += [TransformSpec(angle_deg=a) for a in _ANGLES]
    specs += [TransformSpec(scale=s) for s in _SCALES]
    specs += [TransformSpec(flip=f, angle_deg=a) for f in _FLIPS for a in _ANGLES]
    return specs


def _scaled_shape(shape: tuple[int, int], factor: float) -> tuple[int, int]:
    return (max(1, round(shape[0] * factor)), max(1, round(shape[1] * factor)))


def _apply_to_image(img: np.ndarray, spec: TransformSpec):
    if spec.scale != 1.0:
        out_shape = _scaled_shape(img.shape[:2], spec.scale)
        return resize(img, out_shape, order=1, anti_aliasing=False, preserve_range=True)
    if img.ndim == 3:
        chans = [geom_transform(img[..., c], spec)[0] for c in range(img.shape[2])]
        return np.stack(chans, axis=-1)
    return geom_transform(img, spec)[0]


def _apply_to_mask(mask: np.ndarray, spec: TransformSpec) -> np.ndarray:
    if spec.scale != 1.0:
        out_shape = _scaled_shape(mask.shape, spec.scale)
        return (
            resize(mask.astype(np.float64), out_shape, order=1, anti_aliasing=False) >= 0.5
        )
    return transform_mask(mask, spec)


def make_variants(img: np.ndarray, mask: np.ndarray):
    """Return the 23 (variant image, variant mask, spec) triples."""
    img = np.asarray(img, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    return [(_apply_to_image(img, s), _apply_to_mask(mask, s), s) for s in canonical_specs()]


def merge_predictions(
    original_depth: np.ndarray,
    variant_depths: list[tuple[np.ndarray, TransformSpec]],
    mask: np.ndarray,
) -> np.ndarray:
    """Average the original and all inverse-transformed variant depth maps.

    Each pixel averages only the maps that are valid there under the inverse
    transform, so rotated borders do not drag the mean toward zero.
    """
    original_depth = np.asarray(original_depth, dtype=np.float64)
    have = Counter(spec for _, spec in variant_depths)
    want = Counter(canonical_specs())
    if have != want:
        missing = list(want - have)
        extra = list(have - want)
        raise ValueError(f"variant specs mismatch: missing {missing}, unexpected {extra}")

    acc = original_depth.copy()
    cnt = np.ones(original_depth.shape, dtype=np.float64)
    for depth, spec in variant_depths:
        depth = np.asarray(depth, dtype=np.float64)
        if spec.scale != 1.0:
            inv = resize(
                depth, original_depth.shape, order=1, anti_aliasing=False, preserve_range=True
            )
            valid = np.ones(inv.shape, dtype=bool)
        else:
            inv, valid = geom_transform(depth, spec.inverse())
        acc[valid] += inv[valid]
        cnt[valid] += 1.0
    return acc / cnt
