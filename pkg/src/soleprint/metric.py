"""Depth-to-shoeprint matching: best-match IoU, generic print prediction,
and mIoU aggregation.

The matcher searches for the binarization of a predicted depth map that best
matches a ground-truth print, in three greedy stages:

1. adaptive threshold: sweep s over {0.10, 0.11, ..., 2.00} and keep the
   candidate print {depth < s * d_l} with the highest IoU, where d_l is the
   45x45 mask-normalized local mean depth;
2. non-contact clipping: sweep t_nc over {0.1*p95 + 0.01*j} up to p95 and
   AND the current best print with {depth < t_nc}, keeping improvements;
3. contact filling: sweep t_c over {p05 + 0.1*j} up to 30*p05 and OR the
   current best print with {depth < t_c}, keeping improvements (the best
   print from stage 2 stays the OR base throughout).

All comparisons are strict `<`, all updates require strict IoU improvement
(ties keep the earliest parameter), and everything is restricted to the
validity mask. p95/p05 are nearest-rank percentiles of the masked depth.

The inner sweep is the hot loop; a compiled extension (soleprint._sweep) is
used when available, with a bit-identical numpy fallback (_sweep_py).
Set SOLEPRINT_NO_EXT=1 to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError
from .kernels import local_mean_depth, masked_percentile

if os.environ.get("SOLEPRINT_NO_EXT"):
    from . import _sweep_py as _sweep
else:
    try:
        from . import _sweep  # type: ignore[no-redef]
    except ImportError:
        from . import _sweep_py as _sweep

SWEEP_BACKEND: str = _sweep.BACKEND

CATEGORIES = ("new-athletic", "formal", "used")

__all__ = [
    "MatchParams",
    "EvalRecord",
    "EvalSummary",
    "CATEGORIES",
    "SWEEP_BACKEND",
    "iou",
    "best_match",
    "predict_print",
    "aggregate",
    "s_values",
    "tnc_values",
    "tc_values",
]


@dataclass(frozen=True)
class MatchParams:
    """Winning sweep parameters; None means the stage never improved the IoU."""

    s: Optional[float] = None
    t_nc: Optional[float] = None
    t_c: Optional[float] = None


@dataclass(frozen=True)
class EvalRecord:
    shoe_id: str
    category: str
    iou: float
    params: MatchParams = field(default_factory=MatchParams)

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        if not 0.0 <= self.iou <= 1.0:
            raise ValueError(f"iou must be in [0, 1], got {self.iou}")


@dataclass(frozen=True)
class EvalSummary:
    category_means: dict[str, float]
    category_counts: dict[str, int]
    overall: float


def iou(a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> float:
    """|a & b & mask| / |(a | b) & mask|; 1.0 when both are empty in the mask."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if a.shape != b.shape or a.shape != mask.shape:
        raise ValueError(f"shape mismatch: {a.shape}, {b.shape}, {mask.shape}")
    union = np.count_nonzero((a | b) & mask)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b & mask) / union


def s_values() -> np.ndarray:
    """Stage-1 multiplier grid: 0.1 + 0.01*k for k = 0..190 (191 samples)."""
    return 0.1 + 0.01 * np.arange(191)


def tnc_values(p95: float) -> np.ndarray:
    """Stage-2 grid: 0.1*p95 + 0.01*j while <= p95; empty when p95 < 0."""
    if p95 < 0:
        return np.empty(0)
    # generous j bound, then keep exactly the values the rule admits
    count = int(np.ceil(0.9 * p95 / 0.01)) + 2
    t = 0.1 * p95 + 0.01 * np.arange(max(count, 1))
    return t[t <= p95]


def tc_values(p05: float) -> np.ndarray:
    """Stage-3 grid: p05 + 0.1*j while <= 30*p05; empty when p05 <= 0."""
    if p05 <= 0:
        return np.empty(0)
    count = int(np.ceil(29 * p05 / 0.1)) + 2
    t = p05 + 0.1 * np.arange(max(count, 1))
    return t[t <= 30 * p05]


def _check_inputs(depth, gt, mask):
    if depth.shape != mask.shape or (gt is not None and gt.shape != depth.shape):
        raise ValueError("depth, print, and mask dimensions must match")
    if not mask.any():
        raise DataError("mask is empty")
    if not np.isfinite(depth[mask]).all():
        raise DataError("non-finite depth values inside mask")


def best_match(depth: np.ndarray, gt: np.ndarray, mask: np.ndarray, window: int = 45):
    """Best-match IoU between a depth map and a ground-truth print.

    Returns (iou, best_print, MatchParams). See the module docstring for the
    staged sweep; the result is deterministic with earliest-parameter ties.
    """
    depth = np.asarray(depth, dtype=np.float64)
    gt = np.asarray(gt, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    _check_inputs(depth, gt, mask)

    d_l = local_mean_depth(depth, mask, window)
    p95 = masked_percentile(depth, mask, 95)
    p05 = masked_percentile(depth, mask, 5)
    s_grid = s_values()
    tnc_grid = tnc_values(p95)
    tc_grid = tc_values(p05)

    empty = np.zeros(depth.shape, dtype=bool)
    v_init = iou(empty, gt, mask)

    # pre-mask so the sweep kernels never see unmasked pixels
    depth_m = np.where(mask, depth, np.inf)
    gt_m = gt & mask
    v_max, i_s, i_tnc, i_tc = _sweep.staged_sweep(
        np.ascontiguousarray(depth_m.ravel()),
        np.ascontiguousarray(d_l.ravel()),
        np.ascontiguousarray(gt_m.ravel()).view(np.uint8),
        s_grid,
        tnc_grid,
        tc_grid,
        v_init,
    )

    best = empty
    if i_s >= 0:
        best = (depth < s_grid[i_s] * d_l) & mask
    if i_tnc >= 0:
        best = best & (depth < tnc_grid[i_tnc])
    if i_tc >= 0:
        best = best | ((depth < tc_grid[i_tc]) & mask)
    params = MatchParams(
        s=float(s_grid[i_s]) if i_s >= 0 else None,
        t_nc=float(tnc_grid[i_tnc]) if i_tnc >= 0 else None,
        t_c=float(tc_grid[i_tc]) if i_tc >= 0 else None,
    )
    return float(v_max), best, params


def predict_print(depth: np.ndarray, mask: np.ndarray, window: int = 45) -> np.ndarray:
    """Generic print prediction without ground truth: s=1, t_nc=p97, t_c=p03."""
    depth = np.asarray(depth, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    _check_inputs(depth, None, mask)
    d_l = local_mean_depth(depth, mask, window)
    p97 = masked_percentile(depth, mask, 97)
    p03 = masked_percentile(depth, mask, 3)
    pred = ((depth < d_l) & (depth < p97)) | (depth < p03)
    return pred & mask


def aggregate(records: Sequence[EvalRecord]) -> EvalSummary:
    """Per-category mean IoUs and the overall mean over all records."""
    if not records:
        raise ValueError("no records to aggregate")
    means: dict[str, float] = {}
    counts: dict[str, int] = {}
    for cat in CATEGORIES:
        vals = [r.iou for r in records if r.category == cat]
        if vals:
            means[cat] = float(np.mean(vals))
            counts[cat] = len(vals)
    overall = float(np.mean([r.iou for r in records]))
    return EvalSummary(category_means=means, category_counts=counts, overall=overall)
