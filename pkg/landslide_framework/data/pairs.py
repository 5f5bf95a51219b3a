"""Bitemporal tile pairs: positive windows, negative pairings, augmentation"""
import itertools
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import CloudCoverError, DataError, GeometryError
from ..models import CatalogEntry, PixelRect
from .bands import SENTINEL2_BANDS, band_indices, normalize
from .dihedral import DihedralTransform
from .raster import RasterScene, check_congruent

DEFAULT_MAX_CLOUD_FRACTION = 0.3
MAX_WINDOW_ATTEMPTS = 64

SeedLike = Union[int, np.random.Generator]


@dataclass
class TilePair:
    """A labeled (before, after) example; stacks are [bands, T, T] in [0, 1]"""
    before: np.ndarray
    after: np.ndarray
    label: int
    source_site: str
    before_timestamp: int
    after_timestamp: int
    bbox: Optional[PixelRect] = None

    @property
    def tile_size(self) -> int:
        return self.before.shape[-1]

    @property
    def band_count(self) -> int:
        return self.before.shape[0]

    def to_input(self) -> np.ndarray:
        """[bands, time=2, T, T] network input"""
        return np.stack([self.before, self.after], axis=1)


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _crop(scene: RasterScene, x: int, y: int, tile: int, bands: Sequence[int]) -> np.ndarray:
    return normalize(scene.planes[band_indices(scene, bands), y:y + tile, x:x + tile])


def _window_clouds(scenes: Sequence[RasterScene], x: int, y: int, tile: int) -> float:
    return max(scene.cloud_fraction(x, y, tile, tile) for scene in scenes)


def _check_tile(scene: RasterScene, tile: int) -> None:
    if tile <= 0 or tile > scene.width or tile > scene.height:
        raise GeometryError(f"tile {tile} does not fit scene {scene.width}x{scene.height}")


def valid_offsets(bbox: PixelRect, tile: int, width: int, height: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """Inclusive (lo, hi) ranges of window offsets whose tile fully contains bbox"""
    if bbox.w > tile or bbox.h > tile:
        raise GeometryError(f"bbox {bbox.w}x{bbox.h} is larger than the {tile}-pixel tile")
    if not bbox.fits(width, height):
        raise GeometryError(f"bbox {bbox} lies outside the {width}x{height} scene")
    x_range = (max(0, bbox.x + bbox.w - tile), min(bbox.x, width - tile))
    y_range = (max(0, bbox.y + bbox.h - tile), min(bbox.y, height - tile))
    return x_range, y_range


def sample_window(
    before: RasterScene,
    after: RasterScene,
    bbox: PixelRect,
    tile: int,
    rng_seed: SeedLike,
    site: str = "",
    bands: Sequence[int] = SENTINEL2_BANDS,
    max_cloud_fraction: float = DEFAULT_MAX_CLOUD_FRACTION,
) -> TilePair:
    """Cut a positive pair from a window drawn uniformly among those containing bbox"""
    check_congruent([before, after])
    if before.timestamp >= after.timestamp:
        raise GeometryError(f"before scene ({before.timestamp}) must precede after scene ({after.timestamp})")
    _check_tile(before, tile)
    (x_lo, x_hi), (y_lo, y_hi) = valid_offsets(bbox, tile, before.width, before.height)

    rng = _rng(rng_seed)
    for _ in range(MAX_WINDOW_ATTEMPTS):
        x = int(rng.integers(x_lo, x_hi + 1))
        y = int(rng.integers(y_lo, y_hi + 1))
        if _window_clouds([before, after], x, y, tile) <= max_cloud_fraction:
            return TilePair(
                before=_crop(before, x, y, tile, bands),
                after=_crop(after, x, y, tile, bands),
                label=1,
                source_site=site,
                before_timestamp=before.timestamp,
                after_timestamp=after.timestamp,
                bbox=bbox.shifted(-x, -y),
            )
    raise CloudCoverError(
        f"site {site or '?'}: no window around the landslide below {max_cloud_fraction:.0%} cloud cover "
        f"after {MAX_WINDOW_ATTEMPTS} draws"
    )


def build_negative_pairs(
    scenes: Sequence[RasterScene],
    tile: int,
    count: int,
    rng_seed: SeedLike,
    site: str = "",
    bands: Sequence[int] = SENTINEL2_BANDS,
    max_cloud_fraction: float = DEFAULT_MAX_CLOUD_FRACTION,
) -> List[TilePair]:
    """Pair distinct pre-event acquisitions (earlier one first) as label-0 examples"""
    if len(scenes) < 2:
        raise DataError(f"site {site or '?'}: negative pairs need at least 2 pre-event scenes, got {len(scenes)}")
    ordered = sorted(scenes, key=lambda s: s.timestamp)
    check_congruent(ordered)
    _check_tile(ordered[0], tile)
    pairings = [(a, b) for a, b in itertools.combinations(ordered, 2) if a.timestamp < b.timestamp]
    if not pairings:
        raise DataError(f"site {site or '?'}: pre-event scenes share a single timestamp")

    rng = _rng(rng_seed)
    width, height = ordered[0].width, ordered[0].height
    pairs: List[TilePair] = []
    for _ in range(count):
        for _ in range(MAX_WINDOW_ATTEMPTS):
            first, second = pairings[int(rng.integers(len(pairings)))]
            x = int(rng.integers(0, width - tile + 1))
            y = int(rng.integers(0, height - tile + 1))
            if _window_clouds([first, second], x, y, tile) <= max_cloud_fraction:
                break
        else:
            raise CloudCoverError(
                f"site {site or '?'}: no pre-event window below {max_cloud_fraction:.0%} cloud cover"
            )
        pairs.append(TilePair(
            before=_crop(first, x, y, tile, bands),
            after=_crop(second, x, y, tile, bands),
            label=0,
            source_site=site,
            before_timestamp=first.timestamp,
            after_timestamp=second.timestamp,
        ))
    return pairs


def scene_windows(
    before: RasterScene,
    after: RasterScene,
    tile: int,
    bands: Sequence[int] = SENTINEL2_BANDS,
) -> List[Tuple[int, int, np.ndarray]]:
    """Non-overlapping [bands, 2, T, T] inputs covering the scene; the last row and column hug the far edge"""
    check_congruent([before, after])
    if before.timestamp >= after.timestamp:
        raise GeometryError(f"before scene ({before.timestamp}) must precede after scene ({after.timestamp})")
    _check_tile(before, tile)
    xs = sorted(set(list(range(0, before.width - tile + 1, tile)) + [before.width - tile]))
    ys = sorted(set(list(range(0, before.height - tile + 1, tile)) + [before.height - tile]))
    windows = []
    for y in ys:
        for x in xs:
            stack = np.stack([_crop(before, x, y, tile, bands), _crop(after, x, y, tile, bands)], axis=1)
            windows.append((x, y, stack))
    return windows


def dihedral_augment(pair: TilePair, t: DihedralTransform) -> TilePair:
    if pair.before.shape[-1] != pair.before.shape[-2]:
        raise GeometryError(f"augmentation needs square tiles, got {pair.before.shape[-2:]}")
    if t.is_identity:
        return pair
    return replace(
        pair,
        before=t.apply(pair.before),
        after=t.apply(pair.after),
        bbox=t.apply_rect(pair.bbox, pair.tile_size) if pair.bbox is not None else None,
    )


def catalog_bbox(entry: CatalogEntry, scene: RasterScene, resolution_m: Optional[float] = None) -> PixelRect:
    """Square footprint of side 2 * accuracy / resolution around the catalog point, clamped to the scene"""
    if entry.location_accuracy_km is None:
        raise GeometryError(f"{entry.location_name}: location accuracy unknown, cannot place a footprint")
    resolution = resolution_m or scene.resolution_m
    side = max(1, int(round(2.0 * entry.location_accuracy_km * 1000.0 / resolution)))
    col, row = scene.geo_to_pixel(entry.longitude, entry.latitude)
    if not (0 <= col < scene.width and 0 <= row < scene.height):
        raise GeometryError(f"{entry.location_name}: catalog point falls outside the scene")
    left = int(math.floor(col - side / 2.0 + 0.5))
    top = int(math.floor(row - side / 2.0 + 0.5))
    x0, y0 = max(0, left), max(0, top)
    x1, y1 = min(scene.width, left + side), min(scene.height, top + side)
    return PixelRect(x=x0, y=y0, w=max(1, x1 - x0), h=max(1, y1 - y0))
