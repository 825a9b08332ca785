"""Shared raster kernels: blur, masked local means, percentiles, EDT.

Grids are 2-D numpy arrays, row-major, indexed [row, col]. Grayscale and
depth grids are float64, masks are bool. Depth convention throughout the
package: lower value = closer to the ground (contact).
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import DataError

__all__ = [
    "gaussian_blur",
    "local_mean_depth",
    "masked_percentile",
    "euclidean_distance_transform",
]


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur, kernel truncated at 3*sigma, replicate borders.

    sigma=0 returns a copy of the input.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    img = np.asarray(img, dtype=np.float64)
    if sigma == 0:
        return img.copy()
    return ndimage.gaussian_filter(img, sigma=sigma, truncate=3.0, mode="nearest")


def local_mean_depth(depth: np.ndarray, mask: np.ndarray, window: int = 45) -> np.ndarray:
    """Mask-normalized local mean: boxsum(depth*mask) / boxsum(mask).

    Uses a uniform square window of odd size with zero padding. Pixels whose
    window contains no masked pixel get 0.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {window}")
    depth = np.asarray(depth, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    m = mask.astype(np.float64)
    # where() rather than multiply: depth may be NaN/Inf outside the mask
    num = ndimage.uniform_filter(
        np.where(mask, depth, 0.0), size=window, mode="constant", cval=0.0
    )
    den = ndimage.uniform_filter(m, size=window, mode="constant", cval=0.0)
    out = np.zeros_like(depth)
    # den is boxmean of a 0/1 field; anything above half a pixel's weight is real
    nz = den > 0.5 / (window * window)
    out[nz] = num[nz] / den[nz]
    return out


def masked_percentile(values: np.ndarray, mask: np.ndarray, p: float) -> float:
    """Nearest-rank percentile of values[mask].

    Sort ascending and take the element at 1-based rank ceil(p/100 * n),
    clamped to [1, n].
    """
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"percentile must be in [0, 100], got {p}")
    v = np.asarray(values)[np.asarray(mask, dtype=bool)]
    n = v.size
    if n == 0:
        raise DataError("empty mask: percentile undefined")
    rank = int(np.ceil(p / 100.0 * n))
    rank = min(max(rank, 1), n)
    return float(np.sort(v, kind="stable")[rank - 1])


def euclidean_distance_transform(fg: np.ndarray) -> np.ndarray:
    """Per-pixel Euclidean distance to the nearest False pixel.

    If the mask has no False pixel at all, every distance is capped at
    max(width, height) so downstream squaring stays bounded.
    """
    fg = np.asarray(fg, dtype=bool)
    if fg.all():
        h, w = fg.shape
        return np.full(fg.shape, float(max(w, h)))
    return ndimage.distance_transform_edt(fg)
