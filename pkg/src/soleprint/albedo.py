"""Color machinery: mean-shift clustering, palette extraction, synthetic
albedo composition, and pseudo-albedo segmentation of real tread photos.

Albedo maps are piecewise constant: every pixel carries the mean color of
its segment. Background (outside the mask) is white.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from skimage.color import rgb2lab
from skimage.segmentation import watershed
from skimage.transform import resize

from .errors import DataError
from .kernels import gaussian_blur

__all__ = [
    "Palette",
    "AlbedoMap",
    "mean_shift",
    "extract_palette",
    "compose_albedo",
    "pseudo_albedo",
]

# downsized working resolution (rows, cols) for pseudo-albedo segmentation
PSEUDO_ALBEDO_SIZE = (150, 67)


@dataclass(frozen=True)
class Palette:
    """Primary colors of a tread with their area proportions (sorted descending)."""

    entries: tuple  # of ((r, g, b), proportion)

    def __post_init__(self):
        if not self.entries:
            raise ValueError("palette must have at least one entry")
        total = sum(p for _, p in self.entries)
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"palette proportions must sum to 1, got {total}")
        if any(p <= 0 for _, p in self.entries):
            raise ValueError("palette proportions must be > 0")

    @property
    def colors(self) -> np.ndarray:
        return np.array([c for c, _ in self.entries], dtype=np.float64)

    @property
    def proportions(self) -> np.ndarray:
        return np.array([p for _, p in self.entries], dtype=np.float64)

    def to_json(self) -> list:
        return [{"rgb": list(map(float, c)), "proportion": float(p)} for c, p in self.entries]

    @staticmethod
    def from_json(data: list) -> "Palette":
        return Palette(tuple((tuple(e["rgb"]), e["proportion"]) for e in data))


@dataclass
class AlbedoMap:
    """Piecewise-constant color image with its segment labeling.

    labels is -1 outside the region; every labeled pixel's rgb equals its
    segment color exactly. iterations records refinement passes (pseudo
    albedo only).
    """

    rgb: np.ndarray
    labels: np.ndarray
    colors: dict = field(default_factory=dict)
    iterations: int = 0


def _flat_window_means(positions, points, weights, bandwidth, chunk=256):
    """For each position, the weighted mean of points within bandwidth (flat kernel)."""
    out = np.empty_like(positions)
    wpoints = points * weights[:, None]
    for lo in range(0, len(positions), chunk):
        block = positions[lo : lo + chunk]
        d2 = ((block[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        within = d2 <= bandwidth * bandwidth
        wsum = within @ weights
        out[lo : lo + chunk] = (within @ wpoints) / wsum[:, None]
    return out


def mean_shift(points: np.ndarray, bandwidth: float, tol: float = 1e-4, max_iter: int = 100):
    """Flat-kernel mean-shift clustering.

    Each point iterates to the mean of all input points within `bandwidth`
    of its current position until the shift drops below tol or max_iter is
    reached; converged positions within bandwidth/2 are merged into modes.
    Returns (modes, assignment). Duplicate input points are collapsed with
    weights first, so the result is invariant to input order.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.size == 0:
        raise ValueError("mean_shift needs at least one point")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")

    upts, inverse = np.unique(points, axis=0, return_inverse=True)
    weights = np.bincount(inverse).astype(np.float64)

    pos = upts.copy()
    active = np.ones(len(upts), dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        new = _flat_window_means(pos[active], upts, weights, bandwidth)
        shift = np.linalg.norm(new - pos[active], axis=1)
        pos[active] = new
        still = np.zeros_like(active)
        still[np.flatnonzero(active)[shift >= tol]] = True
        active = still

    # merge converged positions into modes (first-come representatives)
    mode_reps: list[np.ndarray] = []
    groups: list[list[int]] = []
    mode_of = np.empty(len(upts), dtype=np.intp)
    half = bandwidth / 2.0
    for i, p in enumerate(pos):
        for j, rep in enumerate(mode_reps):
            if np.linalg.norm(p - rep) < half:
                mode_of[i] = j
                groups[j].append(i)
                break
        else:
            mode_of[i] = len(mode_reps)
            mode_reps.append(p)
            groups.append([i])

    modes = np.array(
        [np.average(pos[g], axis=0, weights=weights[g]) for g in groups]
    )
    return modes, mode_of[inverse]


def extract_palette(
    img: np.ndarray, mask: np.ndarray, bandwidth: float = 0.08, max_points: int = 20000
) -> Palette:
    """Primary tread colors via mean-shift over (subsampled) masked RGB pixels."""
    mask = np.asarray(mask, dtype=bool)
    pix = np.asarray(img, dtype=np.float64)[mask]
    if len(pix) == 0:
        raise DataError("mask is empty")
    stride = max(1, int(np.ceil(len(pix) / max_points)))
    sub = pix[::stride]
    modes, assign = mean_shift(sub, bandwidth)
    props = np.bincount(assign, minlength=len(modes)) / len(sub)
    order = sorted(range(len(modes)), key=lambda i: (-props[i], tuple(modes[i])))
    entries = tuple(
        (tuple(np.clip(modes[i], 0.0, 1.0)), float(props[i])) for i in order if props[i] > 0
    )
    # renormalize against float round-off
    total = sum(p for _, p in entries)
    entries = tuple((c, p / total) for c, p in entries)
    return Palette(entries)


def _segment_regions(depth, mask, contact_level, smooth_sigma):
    """Tread-element segments: contact components + watershed of the rest."""
    contact = (depth < contact_level) & mask
    non_contact = mask & ~contact
    labels = np.zeros(depth.shape, dtype=np.int64)
    n_seg = 0
    if contact.any():
        lbl, n_seg = ndimage.label(contact)
        labels[contact] = lbl[contact]
    if non_contact.any():
        smoothed = gaussian_blur(depth, smooth_sigma)
        ws = watershed(smoothed, mask=non_contact)
        labels[non_contact] = ws[non_contact] + n_seg
        n_seg = labels.max()
    return labels, int(n_seg)


def compose_albedo(
    depth: np.ndarray,
    mask: np.ndarray,
    palette: Palette,
    seed: int = 0,
    contact_level: float = 0.5,
    smooth_sigma: float = 2.0,
) -> AlbedoMap:
    """Assign palette colors to tread segments matching the palette proportions.

    Segments are processed largest-first (equal areas shuffled by seed) and
    each takes the color with the largest remaining target deficit.
    """
    depth = np.asarray(depth, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise DataError("mask is empty")
    labels, n_seg = _segment_regions(depth, mask, contact_level, smooth_sigma)
    labels[~mask] = 0

    areas = np.bincount(labels.ravel(), minlength=n_seg + 1)[1:]
    total = areas.sum()
    rng = np.random.default_rng(seed)
    ids = rng.permutation(np.arange(1, n_seg + 1))
    ids = ids[np.argsort(-areas[ids - 1], kind="stable")]

    colors = palette.colors
    deficit = palette.proportions.copy()
    seg_color: dict[int, int] = {}
    for sid in ids:
        if areas[sid - 1] == 0:
            continue
        choice = int(np.argmax(deficit))
        seg_color[sid] = choice
        deficit[choice] -= areas[sid - 1] / total

    rgb = np.ones(depth.shape + (3,), dtype=np.float64)
    out_labels = np.full(depth.shape, -1, dtype=np.int64)
    color_map: dict[int, tuple] = {}
    for sid, ci in seg_color.items():
        sel = labels == sid
        rgb[sel] = colors[ci]
        out_labels[sel] = sid - 1
        color_map[sid - 1] = tuple(colors[ci])
    return AlbedoMap(rgb=rgb, labels=out_labels, colors=color_map)


def _connected_segments(mode_labels, region):
    """Split a mode-id map into spatially connected segments, labeled from 0."""
    out = np.full(mode_labels.shape, -1, dtype=np.int64)
    nxt = 0
    for mode in np.unique(mode_labels[region]):
        lbl, n = ndimage.label(region & (mode_labels == mode))
        out[lbl > 0] = lbl[lbl > 0] + nxt - 1
        nxt += n
    return out, nxt


def _neighbor_pairs(labels):
    """Set of (a, b) label pairs sharing a 4-neighborhood boundary."""
    pairs = set()
    for sl_a, sl_b in (
        ((slice(None), slice(None, -1)), (slice(None), slice(1, None))),
        ((slice(None, -1), slice(None)), (slice(1, None), slice(None))),
    ):
        a = labels[sl_a].ravel()
        b = labels[sl_b].ravel()
        diff = (a != b) & (a >= 0) & (b >= 0)
        pairs.update(zip(a[diff].tolist(), b[diff].tolist()))
    return pairs


def pseudo_albedo(
    img: np.ndarray,
    mask: np.ndarray,
    bandwidth: float = 10.0,
    l_scale: float = 0.15,
    min_segment: int = 20,
    merge_tol: float = 8.0,
    max_iter: int = 10,
) -> AlbedoMap:
    """Approximate piecewise-constant albedo for a real shoe-tread photo.

    Pixels are clustered by mean-shift in LAB with the L channel scaled by
    l_scale (suppresses shading without conflating black and white), at a
    small working resolution. Small segments bordering a similar-colored
    neighbor are then merged iteratively, at most max_iter passes.
    """
    img = np.asarray(img, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise DataError("mask is empty")

    lab = rgb2lab(img)
    lab[..., 0] *= l_scale

    if img.shape[:2] == PSEUDO_ALBEDO_SIZE:
        lab_s, mask_s = lab, mask
    else:
        lab_s = resize(lab, PSEUDO_ALBEDO_SIZE, order=1, anti_aliasing=False, preserve_range=True)
        mask_s = (
            resize(mask.astype(np.float64), PSEUDO_ALBEDO_SIZE, order=0, preserve_range=True)
            >= 0.5
        )
        if not mask_s.any():
            raise DataError("mask vanished at working resolution")

    _, assign = mean_shift(lab_s[mask_s], bandwidth)
    mode_map = np.full(mask_s.shape, -1, dtype=np.int64)
    mode_map[mask_s] = assign
    labels, n_seg = _connected_segments(mode_map, mask_s)

    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        sizes = np.bincount(labels[labels >= 0], minlength=n_seg)
        means = np.zeros((n_seg, 3))
        for ch in range(3):
            sums = np.bincount(
                labels[labels >= 0], weights=lab_s[..., ch][labels >= 0], minlength=n_seg
            )
            means[:, ch] = sums / np.maximum(sizes, 1)
        neighbors: dict[int, set] = {}
        for a, b in _neighbor_pairs(labels):
            neighbors.setdefault(a, set()).add(b)

        # plan merges: each small segment joins its closest-colored neighbor
        parent = np.arange(n_seg)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        changed = False
        for sid in range(n_seg):
            if sizes[sid] == 0 or sizes[sid] >= min_segment:
                continue
            best, best_d = -1, merge_tol
            for nb in sorted(neighbors.get(sid, ())):
                d = np.linalg.norm(means[sid] - means[nb])
                if d <= best_d:
                    best, best_d = nb, d
            if best >= 0:
                parent[find(sid)] = find(best)
                changed = True
        if not changed:
            break
        roots = np.array([find(i) for i in range(n_seg)])
        labels = np.where(labels >= 0, roots[np.maximum(labels, 0)], -1)
        # compact ids so bincounts stay small
        uniq = np.unique(labels[labels >= 0])
        remap = np.full(n_seg, -1, dtype=np.int64)
        remap[uniq] = np.arange(len(uniq))
        labels = np.where(labels >= 0, remap[np.maximum(labels, 0)], -1)
        n_seg = len(uniq)

    # back to full resolution
    if labels.shape == img.shape[:2]:
        full = labels
    else:
        full = resize(
            labels.astype(np.float64), img.shape[:2], order=0, preserve_range=True
        ).astype(np.int64)
    full = np.where(mask, full, -1)
    # masked pixels that landed outside any segment take the nearest one
    orphan = mask & (full < 0)
    if orphan.any():
        _, (iy, ix) = ndimage.distance_transform_edt(full < 0, return_indices=True)
        full[orphan] = full[iy[orphan], ix[orphan]]

    rgb = np.ones(img.shape[:2] + (3,), dtype=np.float64)
    color_map: dict[int, tuple] = {}
    for sid in np.unique(full[full >= 0]):
        sel = full == sid
        c = img[sel].mean(axis=0)
        rgb[sel] = c
        color_map[int(sid)] = tuple(c)
    return AlbedoMap(rgb=rgb, labels=full, colors=color_map, iterations=iterations)
