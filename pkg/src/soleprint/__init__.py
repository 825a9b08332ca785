"""Shoe-tread depth and shoeprint toolkit.

Submodules:
    kernels     shared raster kernels (blur, local means, percentiles, EDT)
    transforms  flips/rotations/scalings with validity tracking
    metric      best-match IoU, generic print prediction, mIoU aggregation
    synthdepth  pseudo depth-map generation from lab shoeprints
    albedo      mean-shift palettes, synthetic and pseudo albedo
    render      simplified diffuse renderer with the 17 light environments
    tps         thin-plate-spline print alignment and ground-truth prep
    tta         test-time-augmentation expand/merge
    fileio      PFM/PNG/JSONL/CSV formats
    cli         command-line entry points
"""

from .metric import SWEEP_BACKEND, aggregate, best_match, iou, predict_print

__all__ = ["SWEEP_BACKEND", "aggregate", "best_match", "iou", "predict_print"]
__version__ = "0.1.0"
