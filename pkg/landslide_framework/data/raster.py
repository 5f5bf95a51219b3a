"""LSRS raster scenes.

File layout (little-endian): magic ``LSRS``, version u16, width u32,
height u32, band count u8, band ids u8 x count, native resolution in
meters u16 x count, timestamp i64, geo transform 6 x f64, cloud-mask flag
u8, then one row-major f32 plane per band and the mask plane last.

Bands coarser than the scene grid are stored at their native size and
upsampled by nearest neighbour on load, so all in-memory planes are
congruent.
"""
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import GeometryError, RasterFormatError, TruncatedRasterError

MAGIC = b"LSRS"
VERSION = 1

GeoTransform = Tuple[float, float, float, float, float, float]


@dataclass
class RasterScene:
    """A timestamped multi-band image on one pixel grid"""
    band_ids: List[int]
    planes: np.ndarray
    timestamp: int
    geo_transform: GeoTransform = (0.0, 1.0, 0.0, 0.0, 0.0, -1.0)
    native_resolutions_m: List[int] = field(default_factory=list)
    cloud_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        self.planes = np.asarray(self.planes, dtype=np.float32)
        if self.planes.ndim != 3 or self.planes.shape[0] != len(self.band_ids):
            raise GeometryError(
                f"scene planes must be [bands={len(self.band_ids)}, height, width], got {self.planes.shape}"
            )
        if len(set(self.band_ids)) != len(self.band_ids):
            raise GeometryError(f"duplicate band ids {self.band_ids}")
        if not self.native_resolutions_m:
            self.native_resolutions_m = [10] * len(self.band_ids)
        if len(self.native_resolutions_m) != len(self.band_ids):
            raise GeometryError("one native resolution per band is required")
        self.geo_transform = tuple(float(c) for c in self.geo_transform)
        if len(self.geo_transform) != 6:
            raise GeometryError("geo transform needs 6 coefficients")
        if self.cloud_mask is not None:
            self.cloud_mask = np.asarray(self.cloud_mask, dtype=bool)
            if self.cloud_mask.shape != self.planes.shape[1:]:
                raise GeometryError(f"cloud mask shape {self.cloud_mask.shape} != scene {self.planes.shape[1:]}")

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def resolution_m(self) -> int:
        return min(self.native_resolutions_m)

    def band(self, band_id: int) -> np.ndarray:
        return self.planes[self.band_ids.index(band_id)]

    def pixel_to_geo(self, col: float, row: float) -> Tuple[float, float]:
        """(longitude, latitude) of a continuous pixel coordinate"""
        g = self.geo_transform
        return g[0] + col * g[1] + row * g[2], g[3] + col * g[4] + row * g[5]

    def geo_to_pixel(self, lon: float, lat: float) -> Tuple[float, float]:
        """(col, row) of a geographic point, inverting the geo transform"""
        g = self.geo_transform
        det = g[1] * g[5] - g[2] * g[4]
        if det == 0:
            raise GeometryError("geo transform is singular")
        dx, dy = lon - g[0], lat - g[3]
        return (g[5] * dx - g[2] * dy) / det, (-g[4] * dx + g[1] * dy) / det

    def contains(self, lon: float, lat: float) -> bool:
        col, row = self.geo_to_pixel(lon, lat)
        return 0 <= col < self.width and 0 <= row < self.height

    def cloud_fraction(self, x: int, y: int, w: int, h: int) -> float:
        if self.cloud_mask is None:
            return 0.0
        return float(self.cloud_mask[y:y + h, x:x + w].mean())


def _decimation(native: int, grid: int) -> int:
    if native % grid != 0:
        raise RasterFormatError(f"native resolution {native} m is not a multiple of the {grid} m grid")
    return native // grid


def _stored_extent(extent: int, factor: int) -> int:
    return -(-extent // factor)


def write_raster(path: Union[str, Path], scene: RasterScene) -> Path:
    path = Path(path)
    grid = scene.resolution_m
    band_count = len(scene.band_ids)
    header = [
        MAGIC,
        struct.pack("<HIIB", VERSION, scene.width, scene.height, band_count),
        struct.pack(f"<{band_count}B", *scene.band_ids),
        struct.pack(f"<{band_count}H", *scene.native_resolutions_m),
        struct.pack("<q", int(scene.timestamp)),
        struct.pack("<6d", *scene.geo_transform),
        struct.pack("<B", 1 if scene.cloud_mask is not None else 0),
    ]
    planes = []
    for plane, native in zip(scene.planes, scene.native_resolutions_m):
        factor = _decimation(native, grid)
        planes.append(np.ascontiguousarray(plane[::factor, ::factor], dtype="<f4").tobytes())
    if scene.cloud_mask is not None:
        planes.append(np.ascontiguousarray(scene.cloud_mask, dtype="<f4").tobytes())
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"".join(header + planes))
    except OSError as e:
        raise RasterFormatError(f"cannot write raster {path}: {e}") from e
    return path


def load_raster(path: Union[str, Path]) -> RasterScene:
    """Read an LSRS file, upsampling coarse bands to the scene grid"""
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise RasterFormatError(f"cannot read raster {path}: {e}") from e

    fixed = struct.calcsize("<4sHIIB")
    if len(payload) < fixed:
        raise TruncatedRasterError(str(path), fixed, len(payload))
    magic, version, width, height, band_count = struct.unpack_from("<4sHIIB", payload)
    if magic != MAGIC:
        raise RasterFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise RasterFormatError(f"{path}: unsupported LSRS version {version}")
    if width == 0 or height == 0 or band_count == 0:
        raise RasterFormatError(f"{path}: empty scene {width}x{height} with {band_count} bands")

    layout = f"<{band_count}B{band_count}Hq6dB"
    header_size = fixed + struct.calcsize(layout)
    if len(payload) < header_size:
        raise TruncatedRasterError(str(path), header_size, len(payload))
    fields = struct.unpack_from(layout, payload, fixed)
    band_ids = list(fields[:band_count])
    natives = list(fields[band_count:2 * band_count])
    timestamp = fields[2 * band_count]
    geo_transform = tuple(fields[2 * band_count + 1:2 * band_count + 7])
    has_mask = fields[-1]
    if has_mask not in (0, 1):
        raise RasterFormatError(f"{path}: cloud-mask flag must be 0 or 1, got {has_mask}")
    if min(natives) == 0:
        raise RasterFormatError(f"{path}: zero native resolution")

    grid = min(natives)
    factors = [_decimation(n, grid) for n in natives]
    stored = [(_stored_extent(height, f), _stored_extent(width, f)) for f in factors]
    if has_mask:
        stored.append((height, width))
    expected = header_size + 4 * sum(h * w for h, w in stored)
    if len(payload) < expected:
        raise TruncatedRasterError(str(path), expected, len(payload))
    if len(payload) > expected:
        raise RasterFormatError(f"{path}: {len(payload) - expected} trailing bytes after the last plane")

    offset = header_size
    planes = np.empty((band_count, height, width), dtype=np.float32)
    for index, ((h, w), factor) in enumerate(zip(stored, factors)):
        plane = np.frombuffer(payload, dtype="<f4", count=h * w, offset=offset).reshape(h, w)
        offset += 4 * h * w
        if factor > 1:
            plane = np.repeat(np.repeat(plane, factor, axis=0), factor, axis=1)[:height, :width]
        planes[index] = plane
    cloud_mask = None
    if has_mask:
        mask = np.frombuffer(payload, dtype="<f4", count=height * width, offset=offset).reshape(height, width)
        if not np.all((mask == 0) | (mask == 1)):
            raise RasterFormatError(f"{path}: cloud mask values must be 0 or 1")
        cloud_mask = mask.astype(bool)

    return RasterScene(
        band_ids=band_ids,
        planes=planes,
        timestamp=int(timestamp),
        geo_transform=geo_transform,
        native_resolutions_m=natives,
        cloud_mask=cloud_mask,
    )


def check_congruent(scenes: Sequence[RasterScene]) -> None:
    """Scenes of one site must share grid size and band order"""
    first = scenes[0]
    for scene in scenes[1:]:
        if (scene.height, scene.width) != (first.height, first.width):
            raise GeometryError(
                f"scenes not congruent: {first.height}x{first.width} vs {scene.height}x{scene.width}"
            )
        if scene.band_ids != first.band_ids:
            raise GeometryError(f"scenes carry different bands: {first.band_ids} vs {scene.band_ids}")
