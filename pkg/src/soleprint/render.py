"""Simplified diffuse renderer for synthetic shoe-tread images.

Shading is local: ambient light darkened by a groove ambient-occlusion term
plus up to two directional bulbs, multiplied by the albedo. Background is
white. Stand-in for a full path tracer; tuned for testability, not realism.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .kernels import local_mean_depth

__all__ = [
    "LightConfig",
    "RenderParams",
    "build_light_table",
    "light_table_to_json",
    "light_table_from_json",
    "normals_from_depth",
    "render",
]

DEFAULT_ELEVATION = 45.0
DEFAULT_AMBIENT = 0.75


@dataclass(frozen=True)
class LightConfig:
    """One of the 17 lighting environments: diffuse plus 0, 1, or 2 bulbs.

    Index 0 is diffuse-only; 1-8 add one bulb at azimuth 45*(index-1);
    9-16 add two bulbs 120 degrees apart, the first at azimuth 45*(index-9).
    """

    index: int
    bulbs: tuple  # of (azimuth_deg, elevation_deg)
    ambient: float = DEFAULT_AMBIENT

    def __post_init__(self):
        if not 0 <= self.index <= 16:
            raise ValueError(f"light index must be in [0, 16], got {self.index}")
        expected = 0 if self.index == 0 else 1 if self.index <= 8 else 2
        if len(self.bulbs) != expected:
            raise ValueError(
                f"light {self.index} must have {expected} bulbs, got {len(self.bulbs)}"
            )


def build_light_table(
    elevation: float = DEFAULT_ELEVATION, ambient: float = DEFAULT_AMBIENT
) -> list[LightConfig]:
    table = [LightConfig(0, (), ambient)]
    for i in range(8):
        table.append(LightConfig(1 + i, ((45.0 * i, elevation),), ambient))
    for i in range(8):
        az = 45.0 * i
        table.append(LightConfig(9 + i, ((az, elevation), (az + 120.0, elevation)), ambient))
    return table


def light_table_to_json(table: list[LightConfig]) -> str:
    return json.dumps(
        [
            {"index": lc.index, "bulbs": [list(b) for b in lc.bulbs], "ambient": lc.ambient}
            for lc in table
        ],
        indent=2,
    )


def light_table_from_json(text: str) -> list[LightConfig]:
    return [
        LightConfig(e["index"], tuple(tuple(b) for b in e["bulbs"]), e["ambient"])
        for e in json.loads(text)
    ]


@dataclass(frozen=True)
class RenderParams:
    bulb_weight: float = 0.35
    ao_strength: float = 0.5
    ao_depth_scale: float = 0.1
    ao_window: int = 45
    z_scale: float = 20.0


def normals_from_depth(depth: np.ndarray, z_scale: float = 20.0) -> np.ndarray:
    """Unit surface normals from central-difference depth gradients.

    x runs along columns, y along rows, z toward the camera (n_z > 0).
    """
    depth = np.asarray(depth, dtype=np.float64)
    gy, gx = np.gradient(depth)
    n = np.stack([-z_scale * gx, -z_scale * gy, np.ones_like(depth)], axis=-1)
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    return n


def _bulb_direction(azimuth_deg: float, elevation_deg: float) -> np.ndarray:
    az = np.deg2rad(azimuth_deg)
    el = np.deg2rad(elevation_deg)
    return np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])


def render(
    depth: np.ndarray,
    albedo: np.ndarray,
    light: LightConfig,
    mask: np.ndarray,
    params: RenderParams = RenderParams(),
) -> np.ndarray:
    """Shade (depth, albedo) under one light environment; background white."""
    depth = np.asarray(depth, dtype=np.float64)
    albedo = np.asarray(albedo, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if depth.shape != mask.shape or albedo.shape[:2] != depth.shape:
        raise ValueError("depth, albedo, and mask dimensions must match")

    d_l = local_mean_depth(depth, mask, params.ao_window)
    ao = 1.0 - params.ao_strength * np.clip(
        (depth - d_l) / params.ao_depth_scale, 0.0, 1.0
    )
    shade = light.ambient * ao
    if light.bulbs:
        normals = normals_from_depth(depth, params.z_scale)
        for az, el in light.bulbs:
            shade = shade + params.bulb_weight * np.maximum(
                0.0, normals @ _bulb_direction(az, el)
            )
    out = albedo * np.clip(shade, 0.0, 1.0)[..., None]
    out[~mask] = 1.0
    return np.clip(out, 0.0, 1.0)
