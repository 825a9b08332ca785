"""Pure-numpy fallback for the staged threshold sweep of the matching metric.

Mirrors the compiled extension in soleprint._sweep operation for operation;
both must return bit-identical results. Selected at import time by
soleprint.metric when the extension is unavailable or disabled.

Inputs are pre-masked by the caller: depth = +inf and gt = False outside
the validity mask, so no candidate can include an unmasked pixel.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def _iou_counts(inter: int, union: int) -> float:
    if union == 0:
        return 1.0
    return inter / union


def staged_sweep(depth, d_l, gt, s_grid, tnc_grid, tc_grid, v_init):
    """Run the three greedy threshold sweeps; return (v_max, i_s, i_tnc, i_tc).

    Index -1 means the corresponding stage never improved the IoU. Ties keep
    the earliest grid value (strict-improvement updates only).
    """
    gt = gt.astype(bool)
    v_max = float(v_init)
    i_s = i_tnc = i_tc = -1

    s_best = np.zeros(depth.shape, dtype=bool)
    for i, s in enumerate(s_grid):
        cand = depth < s * d_l
        inter = int(np.count_nonzero(cand & gt))
        union = int(np.count_nonzero(cand | gt))
        v = _iou_counts(inter, union)
        if v > v_max:
            v_max = v
            i_s = i
            s_best = cand

    for i, t in enumerate(tnc_grid):
        cand = s_best & (depth < t)
        inter = int(np.count_nonzero(cand & gt))
        union = int(np.count_nonzero(cand | gt))
        v = _iou_counts(inter, union)
        if v > v_max:
            v_max = v
            i_tnc = i
            s_best = cand

    for i, t in enumerate(tc_grid):
        cand = s_best | (depth < t)
        inter = int(np.count_nonzero(cand & gt))
        union = int(np.count_nonzero(cand | gt))
        v = _iou_counts(inter, union)
        if v > v_max:
            v_max = v
            i_tc = i
            # the contact sweep scores candidates but keeps s_best fixed

    return v_max, i_s, i_tnc, i_tc
