"""Pseudo depth-map generation from binary lab shoeprints.

The pipeline turns a scanned print (colored ink on light background) into a
plausible tread depth map: mask extraction, blur+sigmoid cleanup, high
frequency texture, optional slanted bevels, local curvature inside grooves,
and a global upward curl along the tread edge. Depth convention: contact
surfaces low, non-contact high, values in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.color import rgb2hsv
from skimage.morphology import binary_closing, disk

from .errors import DataError
from .kernels import euclidean_distance_transform, gaussian_blur

__all__ = [
    "SynthDepthConfig",
    "mask_from_print",
    "clean_print",
    "add_texture",
    "add_bevels",
    "add_local_curvature",
    "add_global_curvature",
    "generate_depth",
    "synth_variants",
]


@dataclass(frozen=True)
class SynthDepthConfig:
    blur_sigma: float = 2.0
    sigmoid_gain: float = 10.0
    sigmoid_center: float = 0.5
    texture_amp: float = 0.15
    bevel_width: float = 0.0
    local_curv_amp: float = 0.2
    local_curv_sigma: float = 5.0
    global_curv_amp: float = 0.3
    global_curv_width: float = 40.0
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("texture_amp", "bevel_width", "local_curv_amp", "global_curv_amp"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def mask_from_print(
    print_rgb: np.ndarray,
    hue_range: tuple[float, float] = (10.0, 50.0),
    min_saturation: float = 0.25,
    min_value: float = 0.2,
    hull_radius: int = 15,
) -> np.ndarray:
    """Tread-region mask: filled concave hull of the ink-colored pixels.

    Foreground = pixels whose hue (degrees) falls in hue_range with enough
    saturation and value. The concave hull is rasterized as a morphological
    closing with a disk of hull_radius, then hole-filled; gaps between tread
    blocks smaller than the disk get bridged, the instep notch does not.
    """
    hsv = rgb2hsv(np.asarray(print_rgb, dtype=np.float64))
    hue_deg = hsv[..., 0] * 360.0
    fg = (
        (hue_deg >= hue_range[0])
        & (hue_deg <= hue_range[1])
        & (hsv[..., 1] >= min_saturation)
        & (hsv[..., 2] >= min_value)
    )
    if not fg.any():
        raise DataError("no ink-colored pixels found in print image")
    # pad so the closing cannot smear foreground into the image border
    r = hull_radius + 1
    padded = np.pad(fg, r, mode="constant", constant_values=False)
    closed = binary_closing(padded, disk(hull_radius))[r:-r, r:-r]
    return ndimage.binary_fill_holes(closed)


def clean_print(print_gray: np.ndarray, mask: np.ndarray, cfg: SynthDepthConfig) -> np.ndarray:
    """Blur + sigmoid noise filtering; background forced to 1 (non-contact)."""
    g = gaussian_blur(np.asarray(print_gray, dtype=np.float64), cfg.blur_sigma)
    out = 1.0 / (1.0 + np.exp(-cfg.sigmoid_gain * (g - cfg.sigmoid_center)))
    out[~np.asarray(mask, dtype=bool)] = 1.0
    return out


def add_texture(
    depth: np.ndarray, print_gray: np.ndarray, amp: float, sigma: float = 2.0
) -> np.ndarray:
    """Add high-pass detail of the raw print back onto the depth map."""
    hp = np.asarray(print_gray, dtype=np.float64) - gaussian_blur(print_gray, sigma)
    return np.clip(depth + amp * hp, 0.0, 1.0)


def add_bevels(depth: np.ndarray, width: float, contact_level: float = 0.5) -> np.ndarray:
    """Slant the rims of contact blocks: depth ramps up linearly toward block edges."""
    depth = np.asarray(depth, dtype=np.float64)
    if width == 0:
        return depth.copy()
    contact = depth < contact_level
    dist = euclidean_distance_transform(contact)
    ramp = np.clip(1.0 - dist / width, 0.0, 1.0)
    out = depth.copy()
    out[contact] += (ramp * (1.0 - depth))[contact]
    return np.clip(out, 0.0, 1.0)


def add_local_curvature(
    depth: np.ndarray, amp: float, sigma: float = 5.0, contact_level: float = 0.5
) -> np.ndarray:
    """Give non-contact regions some dimension: smoothed squared EDT, peak = amp."""
    depth = np.asarray(depth, dtype=np.float64)
    non_contact = depth >= contact_level
    field = gaussian_blur(euclidean_distance_transform(non_contact) ** 2, sigma)
    peak = field.max()
    if peak > 0:
        field *= amp / peak
    return np.clip(depth + field, 0.0, 1.0)


def add_global_curvature(
    depth: np.ndarray, mask: np.ndarray, amp: float, width: float
) -> np.ndarray:
    """Curl the tread up near the mask boundary with a squared falloff."""
    depth = np.asarray(depth, dtype=np.float64)
    dist = euclidean_distance_transform(np.asarray(mask, dtype=bool))
    field = amp * (1.0 - np.minimum(dist / width, 1.0)) ** 2
    return np.clip(depth + field, 0.0, 1.0)


def generate_depth(
    print_gray: np.ndarray, mask: np.ndarray, cfg: SynthDepthConfig
) -> np.ndarray:
    """Full depth pipeline on a grayscale print (ink dark) and its mask.

    The print is min-max normalized inside the mask first so the sigmoid
    center always separates ink from background.
    """
    g = np.asarray(print_gray, dtype=np.float64).copy()
    mask = np.asarray(mask, dtype=bool)
    inside = g[mask]
    lo, hi = inside.min(), inside.max()
    if hi > lo:
        g = (g - lo) / (hi - lo)
    g = np.clip(g, 0.0, 1.0)

    depth = clean_print(g, mask, cfg)
    depth = add_texture(depth, g, cfg.texture_amp, cfg.blur_sigma)
    depth = add_bevels(depth, cfg.bevel_width)
    depth = add_local_curvature(depth, cfg.local_curv_amp, cfg.local_curv_sigma)
    depth = add_global_curvature(depth, mask, cfg.global_curv_amp, cfg.global_curv_width)
    return depth


def _random_config(rng: np.random.Generator, seed: int) -> SynthDepthConfig:
    return SynthDepthConfig(
        blur_sigma=rng.uniform(1.5, 3.0),
        sigmoid_gain=rng.uniform(8.0, 14.0),
        sigmoid_center=rng.uniform(0.45, 0.55),
        texture_amp=rng.uniform(0.05, 0.25),
        bevel_width=float(rng.choice([0, 2, 3, 4, 5, 6])),
        local_curv_amp=rng.uniform(0.1, 0.3),
        local_curv_sigma=rng.uniform(3.0, 7.0),
        global_curv_amp=rng.uniform(0.2, 0.4),
        global_curv_width=rng.uniform(30.0, 50.0),
        rng_seed=seed,
    )


def synth_variants(print_rgb: np.ndarray, n: int, seed: int):
    """Generate n randomized depth variants of one print; deterministic per seed."""
    if not 10 <= n <= 15:
        raise ValueError(f"variant count must be in [10, 15], got {n}")
    mask = mask_from_print(print_rgb)
    rgb = np.asarray(print_rgb, dtype=np.float64)
    gray = rgb @ np.array([0.299, 0.587, 0.114])
    out = []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(n)):
        cfg = _random_config(np.random.default_rng(child), seed=i)
        out.append((generate_depth(gray, mask, cfg), mask.copy()))
    return out
