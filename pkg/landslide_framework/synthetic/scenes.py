"""Procedural before/after scene pairs with known landslide scars.

Terrain is two octaves of value noise (the texture scale and a quarter of
it, mixed 70/30) shaped into a vegetated spectral signature. The after
scene is the before scene under a global illumination factor, plus an
optional scar and optional clouds. Band 12 is generated on its native
20 m grid and replicated 2x2 so it survives an LSRS round trip exactly.
"""
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from ..data.bands import SENTINEL2_BANDS
from ..data.pairs import TilePair
from ..data.raster import GeoTransform, RasterScene
from ..exceptions import GeometryError
from ..models import PixelRect
from ..seeding import derive_rng

# Vegetated surface reflectance means (x10000): NIR high, red moderate
BAND_MEANS = {2: 450.0, 3: 700.0, 4: 600.0, 8: 3200.0, 12: 1400.0}
NATIVE_RESOLUTION_M = {2: 10, 3: 10, 4: 10, 8: 10, 12: 20}
DEFAULT_SCAR_INTENSITY = {4: 800.0, 8: -1500.0, 12: 1200.0}
CLOUD_VALUE = 9000.0
COARSE_MIX = 0.7


class ScarSpec(BaseModel):
    """Rotated rectangle of exposed ground, centre in continuous pixel units"""
    center_x: float
    center_y: float
    length_px: float = Field(gt=0.0)
    width_px: float = Field(gt=0.0)
    orientation_deg: float = Field(default=0.0)
    intensity: Dict[int, float] = Field(default_factory=lambda: dict(DEFAULT_SCAR_INTENSITY))

    def half_extents(self) -> Tuple[float, float]:
        """Half-size of the axis-aligned box around the scar including its falloff"""
        theta = math.radians(self.orientation_deg)
        a, b = self.length_px / 2.0 + 1.0, self.width_px / 2.0 + 1.0
        return (abs(a * math.cos(theta)) + abs(b * math.sin(theta)),
                abs(a * math.sin(theta)) + abs(b * math.cos(theta)))


class SceneSpec(BaseModel):
    size: int = Field(default=64, ge=16, description="Pixels per side, even")
    seed: int = Field(default=0, ge=0)
    has_landslide: bool = False
    scar: Optional[ScarSpec] = None
    illumination_delta: float = Field(default=1.0, ge=0.7, le=1.3)
    cloud_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    texture_scale: int = Field(default=32, ge=4)
    acquisition: int = Field(default=0, ge=0, description="Keys the cloud pattern of the after scene")
    before_timestamp: int = 0
    after_timestamp: int = 1
    geo_transform: GeoTransform = (0.0, 1.0, 0.0, 0.0, 0.0, -1.0)

    @field_validator("size")
    @classmethod
    def _even_size(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"scene size must be even for the 20 m band grid, got {value}")
        return value

    @model_validator(mode="after")
    def _check_scar(self) -> "SceneSpec":
        if self.has_landslide and self.scar is None:
            raise ValueError("has_landslide requires a scar")
        if self.before_timestamp >= self.after_timestamp:
            raise ValueError("before_timestamp must precede after_timestamp")
        return self


@dataclass
class GroundTruth:
    label: int
    scar_bbox: Optional[PixelRect]
    scar_mask: np.ndarray


def value_noise(rng: np.random.Generator, size: int, scale: int) -> np.ndarray:
    """Smoothstep-interpolated lattice noise in [0, 1]"""
    scale = max(1, scale)
    cells = size // scale + 2
    lattice = rng.random((cells, cells))
    coords = np.arange(size) / scale
    i0 = np.floor(coords).astype(int)
    t = coords - i0
    t = t * t * (3.0 - 2.0 * t)
    tx, ty = t[None, :], t[:, None]
    top = lattice[np.ix_(i0, i0)] * (1 - tx) + lattice[np.ix_(i0, i0 + 1)] * tx
    bottom = lattice[np.ix_(i0 + 1, i0)] * (1 - tx) + lattice[np.ix_(i0 + 1, i0 + 1)] * tx
    return top * (1 - ty) + bottom * ty


def terrain_field(rng: np.random.Generator, size: int, texture_scale: int) -> np.ndarray:
    coarse = value_noise(rng, size, texture_scale)
    fine = value_noise(rng, size, texture_scale // 4)
    return COARSE_MIX * coarse + (1.0 - COARSE_MIX) * fine


def _block_replicate(plane: np.ndarray, factor: int) -> np.ndarray:
    """Average factor x factor blocks and spread each mean back over its block"""
    if factor == 1:
        return plane
    size = plane.shape[0]
    blocks = plane.reshape(size // factor, factor, size // factor, factor).mean(axis=(1, 3))
    return np.repeat(np.repeat(blocks, factor, axis=0), factor, axis=1)


def scar_weight(scar: ScarSpec, size: int) -> np.ndarray:
    """Per-pixel scar coverage: 1 inside, linear falloff over one pixel, 0 beyond"""
    half_x, half_y = scar.half_extents()
    if (scar.center_x - half_x < 0 or scar.center_y - half_y < 0
            or scar.center_x + half_x > size or scar.center_y + half_y > size):
        raise GeometryError(
            f"scar at ({scar.center_x}, {scar.center_y}) with extents ({half_x:.1f}, {half_y:.1f}) "
            f"does not fit the {size}-pixel scene"
        )
    theta = math.radians(scar.orientation_deg)
    centers = np.arange(size) + 0.5
    dx = centers[None, :] - scar.center_x
    dy = centers[:, None] - scar.center_y
    along = dx * math.cos(theta) + dy * math.sin(theta)
    across = -dx * math.sin(theta) + dy * math.cos(theta)
    weight_along = np.clip(scar.length_px / 2.0 + 1.0 - np.abs(along), 0.0, 1.0)
    weight_across = np.clip(scar.width_px / 2.0 + 1.0 - np.abs(across), 0.0, 1.0)
    return weight_along * weight_across


def tight_bbox(mask: np.ndarray) -> Optional[PixelRect]:
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        return None
    return PixelRect(x=int(cols[0]), y=int(rows[0]), w=int(cols[-1] - cols[0] + 1), h=int(rows[-1] - rows[0] + 1))


def cloud_mask(spec: SceneSpec) -> np.ndarray:
    """Circular blobs drawn on the 20 m grid until the requested fraction is covered"""
    mask = np.zeros((spec.size, spec.size), dtype=bool)
    if spec.cloud_fraction <= 0.0:
        return mask
    coarse = spec.size // 2
    grid = np.zeros((coarse, coarse), dtype=bool)
    rng = derive_rng(spec.seed, "clouds", spec.acquisition)
    rows, cols = np.mgrid[0:coarse, 0:coarse]
    max_radius = max(2.0, coarse / 6.0)
    while grid.mean() < spec.cloud_fraction:
        cy, cx = rng.uniform(0, coarse, size=2)
        radius = rng.uniform(1.0, max_radius)
        grid |= (rows - cy) ** 2 + (cols - cx) ** 2 <= radius ** 2
    mask[:] = np.repeat(np.repeat(grid, 2, axis=0), 2, axis=1)
    return mask


def base_planes(spec: SceneSpec, bands: Sequence[int] = SENTINEL2_BANDS) -> np.ndarray:
    """Before-scene reflectance planes, float64, congruent on the 10 m grid"""
    rng = np.random.default_rng(spec.seed)
    terrain = terrain_field(rng, spec.size, spec.texture_scale)
    planes = np.empty((len(bands), spec.size, spec.size), dtype=np.float64)
    for index, band in enumerate(bands):
        detail = terrain_field(rng, spec.size, spec.texture_scale)
        field = 0.8 * terrain + 0.2 * detail
        plane = BAND_MEANS[band] * (0.75 + 0.5 * field)
        factor = NATIVE_RESOLUTION_M[band] // min(NATIVE_RESOLUTION_M[b] for b in bands)
        planes[index] = np.repeat(np.repeat(plane[::factor, ::factor], factor, axis=0), factor, axis=1)
    return planes


def generate_scene_pair(
    spec: SceneSpec,
    bands: Sequence[int] = SENTINEL2_BANDS,
) -> Tuple[RasterScene, RasterScene, GroundTruth]:
    before_planes = base_planes(spec, bands).astype(np.float32)
    after_planes = before_planes.astype(np.float64) * spec.illumination_delta
    grid = min(NATIVE_RESOLUTION_M[b] for b in bands)

    mask = np.zeros((spec.size, spec.size), dtype=bool)
    if spec.has_landslide:
        weight = scar_weight(spec.scar, spec.size)
        for index, band in enumerate(bands):
            delta = spec.scar.intensity.get(band, 0.0)
            if delta == 0.0:
                continue
            band_weight = _block_replicate(weight, NATIVE_RESOLUTION_M[band] // grid)
            after_planes[index] += delta * band_weight
            mask |= band_weight > 0
    after_planes = np.clip(after_planes, 0.0, None)

    clouds = cloud_mask(spec)
    after_planes[:, clouds] = CLOUD_VALUE

    natives = [NATIVE_RESOLUTION_M[b] for b in bands]
    before = RasterScene(
        band_ids=list(bands), planes=before_planes, timestamp=spec.before_timestamp,
        geo_transform=spec.geo_transform, native_resolutions_m=natives,
    )
    after = RasterScene(
        band_ids=list(bands), planes=after_planes.astype(np.float32), timestamp=spec.after_timestamp,
        geo_transform=spec.geo_transform, native_resolutions_m=natives,
        cloud_mask=clouds if spec.cloud_fraction > 0 else None,
    )
    truth = GroundTruth(label=int(spec.has_landslide), scar_bbox=tight_bbox(mask), scar_mask=mask)
    return before, after, truth


# Separability oracle

HEURISTIC_THRESHOLD = 0.01
CLOUD_BRIGHTNESS = 0.5


def _centered_box(size: int) -> PixelRect:
    side = max(1, size // 4)
    offset = (size - side) // 2
    return PixelRect(x=offset, y=offset, w=side, h=side)


def heuristic_score(
    before: np.ndarray,
    after: np.ndarray,
    bbox: Optional[PixelRect],
    bands: Sequence[int] = SENTINEL2_BANDS,
) -> float:
    """Mean |after - before| of band 12 inside bbox minus outside it.

    Stacks are normalized [bands, H, W]; pixels bright in band 2 in either
    image are treated as cloud and ignored.
    """
    swir, blue = list(bands).index(12), list(bands).index(2)
    size = before.shape[-1]
    box = bbox or _centered_box(size)
    inside = np.zeros(before.shape[-2:], dtype=bool)
    inside[box.y:box.y + box.h, box.x:box.x + box.w] = True
    clear = (before[blue] < CLOUD_BRIGHTNESS) & (after[blue] < CLOUD_BRIGHTNESS)
    diff = np.abs(after[swir].astype(np.float64) - before[swir])
    in_pixels, out_pixels = diff[inside & clear], diff[~inside & clear]
    if in_pixels.size == 0 or out_pixels.size == 0:
        return 0.0
    return float(in_pixels.mean() - out_pixels.mean())


def heuristic_classify(pairs: Sequence[TilePair], threshold: float = HEURISTIC_THRESHOLD) -> List[int]:
    """Label each TilePair 1 when its band-12 change concentrates in the landslide box"""
    return [int(heuristic_score(p.before, p.after, p.bbox) > threshold) for p in pairs]
