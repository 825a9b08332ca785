"""Regularized thin-plate-spline warps for ground-truth print preparation.

A warp is fitted from landmark correspondences (src -> dst) with kernel
U(r) = r^2 log(r^2) and smoothness lambda added to the kernel matrix
diagonal; warp_image treats a fitted warp as the output-to-source mapping
and samples bilinearly. Collected ink prints aligned to the tread frame are
averaged and thresholded into the final ground-truth shoeprint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

__all__ = ["Correspondences", "TpsWarp", "fit_tps", "warp_image", "average_and_threshold"]

_MAX_COND = 1e12


@dataclass(frozen=True)
class Correspondences:
    """Paired landmarks, src[i] -> dst[i], as (n, 2) arrays of (x, y) pixels."""

    src: np.ndarray
    dst: np.ndarray

    def __post_init__(self):
        src = np.atleast_2d(np.asarray(self.src, dtype=np.float64))
        dst = np.atleast_2d(np.asarray(self.dst, dtype=np.float64))
        if src.shape != dst.shape or src.shape[1] != 2:
            raise ValueError("src and dst must both be (n, 2) point arrays")
        if len(src) < 3:
            raise ValueError(f"need at least 3 correspondences, got {len(src)}")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)

    @staticmethod
    def from_csv(path) -> "Correspondences":
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=np.float64)
        if rows.shape[1] != 4:
            raise ValueError("correspondence CSV needs columns src_x,src_y,dst_x,dst_y")
        return Correspondences(rows[:, :2], rows[:, 2:])


def _kernel(r2: np.ndarray) -> np.ndarray:
    # U(r) = r^2 log(r^2) with U(0) = 0
    out = np.zeros_like(r2)
    nz = r2 > 0
    out[nz] = r2[nz] * np.log(r2[nz])
    return out


@dataclass(frozen=True)
class TpsWarp:
    """Fitted spline: x and y maps share control points, each with affine
    coefficients (a0 + ax*x + ay*y) and one kernel weight per control point."""

    control: np.ndarray  # (n, 2)
    weights: np.ndarray  # (n, 2), kernel weights for the x and y maps
    affine: np.ndarray  # (3, 2), rows [const, x, y]
    smoothness: float

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Map (m, 2) points through the warp."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        r2 = ((pts[:, None, :] - self.control[None, :, :]) ** 2).sum(axis=2)
        u = _kernel(r2)
        ones = np.ones((len(pts), 1))
        return np.hstack([ones, pts]) @ self.affine + u @ self.weights

    def side_condition_residual(self) -> float:
        """Max abs residual of sum(w) = 0, sum(w*x) = 0, sum(w*y) = 0."""
        p = np.hstack([np.ones((len(self.control), 1)), self.control])
        return float(np.abs(p.T @ self.weights).max())


def fit_tps(c: Correspondences, smoothness: float = 0.5) -> TpsWarp:
    """Solve the regularized TPS system, one warp per output coordinate."""
    src, dst = c.src, c.dst
    n = len(src)
    r2 = ((src[:, None, :] - src[None, :, :]) ** 2).sum(axis=2)
    k = _kernel(r2) + smoothness * np.eye(n)
    p = np.hstack([np.ones((n, 1)), src])
    system = np.block([[k, p], [p.T, np.zeros((3, 3))]])
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > _MAX_COND:
        raise NumericalError(
            f"degenerate correspondences (collinear points?): condition number {cond:.3e}"
        )
    rhs = np.vstack([dst, np.zeros((3, 2))])
    sol = np.linalg.solve(system, rhs)
    return TpsWarp(
        control=src.copy(), weights=sol[:n], affine=sol[n:], smoothness=smoothness
    )


def warp_image(img: np.ndarray, warp: TpsWarp, out_size: tuple[int, int]) -> np.ndarray:
    """Resample img through the warp (output pixel -> source position).

    out_size is (height, width); positions outside the source are 0 (no ink).
    """
    img = np.asarray(img, dtype=np.float64)
    h_out, w_out = out_size
    cols, rows = np.meshgrid(np.arange(w_out), np.arange(h_out))
    pts = np.stack([cols.ravel(), rows.ravel()], axis=1).astype(np.float64)
    mapped = warp(pts)
    xs = mapped[:, 0].reshape(h_out, w_out)
    ys = mapped[:, 1].reshape(h_out, w_out)

    h, w = img.shape
    valid = (xs >= 0) & (xs <= w - 1) & (ys >= 0) & (ys <= h - 1)
    x0 = np.clip(np.floor(xs).astype(np.intp), 0, w - 1)
    y0 = np.clip(np.floor(ys).astype(np.intp), 0, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = np.clip(xs, 0, w - 1) - x0
    fy = np.clip(ys, 0, h - 1) - y0
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    out = top * (1 - fy) + bot * fy
    out[~valid] = 0.0
    return out


def average_and_threshold(prints: list[np.ndarray], threshold: float = 0.5) -> np.ndarray:
    """Mean the aligned ink images (1 = full ink) and keep pixels >= threshold."""
    if len(prints) < 2:
        raise ValueError(f"need at least 2 aligned prints, got {len(prints)}")
    shapes = {p.shape for p in prints}
    if len(shapes) != 1:
        raise ValueError(f"aligned prints must share dimensions, got {shapes}")
    mean = np.mean([np.asarray(p, dtype=np.float64) for p in prints], axis=0)
    return mean >= threshold
