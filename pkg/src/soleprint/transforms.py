"""Geometric transforms on grids: flips, rotations, scalings, and compositions.

A TransformSpec encodes flip-then-rotate-then-scale about the image center,
which covers every augmentation used in the toolkit. Flips are exact pixel
permutations; rotation and scaling resample bilinearly on the same canvas
and flag out-of-support output pixels as invalid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TransformSpec", "geom_transform", "transform_mask"]

_FLIPS = ("none", "h", "v", "hv")


@dataclass(frozen=True)
class TransformSpec:
    """Flip (applied first), then rotation by angle_deg, then scale, all about center."""

    flip: str = "none"
    angle_deg: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.flip not in _FLIPS:
            raise ValueError(f"flip must be one of {_FLIPS}, got {self.flip!r}")
        if self.scale <= 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")

    @property
    def is_identity(self) -> bool:
        return self.flip == "none" and self.angle_deg == 0.0 and self.scale == 1.0

    def inverse(self) -> "TransformSpec":
        """Spec undoing this one under the same flip-rotate-scale convention.

        Single-axis flips anti-commute with rotations, so the inverse of
        flip-then-rotate(a) is flip-then-rotate(a) again; 'none' and 'hv'
        commute and just negate the angle.
        """
        if self.flip in ("h", "v"):
            ang = self.angle_deg
        else:
            ang = -self.angle_deg
        return TransformSpec(self.flip, ang, 1.0 / self.scale)

    def to_json(self) -> dict:
        return {"flip": self.flip, "angle_deg": self.angle_deg, "scale": self.scale}

    @staticmethod
    def from_json(d: dict) -> "TransformSpec":
        return TransformSpec(d["flip"], float(d["angle_deg"]), float(d["scale"]))


def _source_coords(spec: TransformSpec, shape: tuple[int, int]):
    """Map each output pixel to its source position under spec's inverse."""
    h, w = shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rows, cols = np.mgrid[0:h, 0:w]
    x = (cols - cx) / spec.scale
    y = (rows - cy) / spec.scale
    if spec.angle_deg != 0.0:
        t = np.deg2rad(spec.angle_deg)
        c, s = np.cos(t), np.sin(t)
        x, y = c * x + s * y, -s * x + c * y
    xs = x + cx
    ys = y + cy
    if spec.flip in ("h", "hv"):
        xs = (w - 1) - xs
    if spec.flip in ("v", "hv"):
        ys = (h - 1) - ys
    return ys, xs


def _bilinear(img: np.ndarray, ys: np.ndarray, xs: np.ndarray):
    h, w = img.shape
    valid = (ys >= 0) & (ys <= h - 1) & (xs >= 0) & (xs <= w - 1)
    y0 = np.clip(np.floor(ys).astype(np.intp), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(np.intp), 0, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = np.clip(ys, 0, h - 1) - y0
    fx = np.clip(xs, 0, w - 1) - x0
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    out = top * (1 - fy) + bot * fy
    out[~valid] = 0.0
    return out, valid


def geom_transform(img: np.ndarray, spec: TransformSpec):
    """Apply spec to a float grid. Returns (out, valid) with out zeroed where invalid."""
    img = np.asarray(img, dtype=np.float64)
    if spec.is_identity:
        return img.copy(), np.ones(img.shape, dtype=bool)
    ys, xs = _source_coords(spec, img.shape)
    return _bilinear(img, ys, xs)


def transform_mask(mask: np.ndarray, spec: TransformSpec) -> np.ndarray:
    """Apply spec to a boolean mask; resampled values >= 0.5 and in-support."""
    out, valid = geom_transform(np.asarray(mask, dtype=np.float64), spec)
    return (out >= 0.5) & valid
