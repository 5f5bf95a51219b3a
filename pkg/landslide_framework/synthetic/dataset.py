"""Write a synthetic landslide dataset: LSRS scenes, catalog and truth sidecar.

Layout::

    <out>/catalog.csv
    <out>/truth.csv
    <out>/scenes/<site_id>/day_<NNN>.lsrs

Positive sites get two pre-event acquisitions and one post-event
acquisition; negative sites get three pre-event acquisitions. All
acquisitions follow the 5-day revisit cadence.
"""
import calendar
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import List, Tuple, Union

from ..data.catalog import serialize_catalog
from ..data.raster import GeoTransform, RasterScene, write_raster
from ..exceptions import DataError
from ..models import CatalogEntry, PixelRect, SizeClass
from ..seeding import derive_rng, derive_seed
from ..utils.logging import get_logger
from .scenes import NATIVE_RESOLUTION_M, ScarSpec, SceneSpec, generate_scene_pair

REVISIT_DAYS = 5
EVENT_DAY = 7
ACQUISITION_SECONDS = 10 * 3600 + 30 * 60
FIRST_ACQUISITION = date(2016, 6, 1)
SITE_SPACING_DAYS = 11
METERS_PER_DEGREE = 111320.0
CLOUDY_PROBABILITY = 0.2
CLOUDY_FRACTION = 0.05
TRUTH_HEADER = "site_id;label;bbox_x;bbox_y;bbox_w;bbox_h"


@dataclass
class DatasetSummary:
    out_dir: Path
    positive_sites: List[str] = field(default_factory=list)
    negative_sites: List[str] = field(default_factory=list)
    scene_files: List[Path] = field(default_factory=list)

    @property
    def sites(self) -> List[str]:
        return self.positive_sites + self.negative_sites

    @property
    def catalog_path(self) -> Path:
        return self.out_dir / "catalog.csv"

    @property
    def truth_path(self) -> Path:
        return self.out_dir / "truth.csv"


def site_name(index: int) -> str:
    return f"site_{index:03d}"


def _timestamp(day: date) -> int:
    return calendar.timegm(day.timetuple()) + ACQUISITION_SECONDS


def _geo_transform(rng, resolution_m: float) -> GeoTransform:
    lat = float(rng.uniform(-50.0, 60.0))
    lon = float(rng.uniform(-170.0, 170.0))
    dy = resolution_m / METERS_PER_DEGREE
    dx = dy / math.cos(math.radians(lat))
    return (lon, dx, 0.0, lat, 0.0, -dy)


def _random_scar(rng, size: int) -> ScarSpec:
    longest = min(0.3 * size, 40.0)
    length = float(rng.uniform(longest / 2.0, longest))
    width = float(rng.uniform(3.0, max(4.0, length / 3.0)))
    scar = ScarSpec(center_x=0.0, center_y=0.0, length_px=length, width_px=width,
                    orientation_deg=float(rng.uniform(0.0, 180.0)))
    half_x, half_y = scar.half_extents()
    scar.center_x = float(rng.uniform(half_x + 1.0, size - half_x - 1.0))
    scar.center_y = float(rng.uniform(half_y + 1.0, size - half_y - 1.0))
    return scar


def _acquisition_spec(rng, base: dict, acquisition: int, after_day: date, **extra) -> SceneSpec:
    cloudy = rng.random() < CLOUDY_PROBABILITY
    return SceneSpec(
        **base,
        illumination_delta=float(rng.uniform(0.9, 1.1)),
        cloud_fraction=CLOUDY_FRACTION if cloudy else 0.0,
        acquisition=acquisition,
        after_timestamp=_timestamp(after_day),
        **extra,
    )


def _site_scenes(index: int, positive: bool, size: int, master_seed: int) -> Tuple[List[Tuple[date, RasterScene]], PixelRect, GeoTransform, date]:
    rng = derive_rng(master_seed, "site", index)
    first_day = FIRST_ACQUISITION + timedelta(days=SITE_SPACING_DAYS * index)
    geo = _geo_transform(rng, min(NATIVE_RESOLUTION_M.values()))
    base = {
        "size": size,
        "seed": derive_seed(master_seed, "terrain", index) & 0x7FFFFFFF,
        "before_timestamp": _timestamp(first_day),
        "geo_transform": geo,
    }
    second_day = first_day + timedelta(days=REVISIT_DAYS)
    third_day = first_day + timedelta(days=2 * REVISIT_DAYS)

    first, second, _ = generate_scene_pair(_acquisition_spec(rng, base, 1, second_day))
    if positive:
        spec = _acquisition_spec(rng, base, 2, third_day, has_landslide=True, scar=_random_scar(rng, size))
    else:
        spec = _acquisition_spec(rng, base, 2, third_day)
    _, third, truth = generate_scene_pair(spec)
    scenes = [(first_day, first), (second_day, second), (third_day, third)]
    return scenes, truth.scar_bbox, geo, first_day


def _catalog_entry(site_id: str, bbox: PixelRect, geo: GeoTransform, event_day: date) -> CatalogEntry:
    col, row = bbox.x + bbox.w / 2.0, bbox.y + bbox.h / 2.0
    lon = geo[0] + col * geo[1] + row * geo[2]
    lat = geo[3] + col * geo[4] + row * geo[5]
    resolution = min(NATIVE_RESOLUTION_M.values())
    return CatalogEntry(
        location_name=f"Synthetic {site_id}",
        event_date=event_day,
        size_class=SizeClass.VERY_LARGE,
        event_type="landslide",
        latitude=lat,
        longitude=lon,
        location_accuracy_km=(max(bbox.w, bbox.h) / 2.0 + 1.0) * resolution / 1000.0,
    )


def generate_dataset(
    n_positive: int,
    n_negative: int,
    size: int,
    master_seed: int,
    out_dir: Union[str, Path],
) -> DatasetSummary:
    if n_positive < 0 or n_negative < 0:
        raise DataError(f"site counts must be non-negative, got {n_positive} positive and {n_negative} negative")
    out_dir = Path(out_dir)
    summary = DatasetSummary(out_dir=out_dir)
    entries: List[CatalogEntry] = []
    truth_lines = [TRUTH_HEADER]
    logger = get_logger()

    try:
        (out_dir / "scenes").mkdir(parents=True, exist_ok=True)
        for index in range(n_positive + n_negative):
            positive = index < n_positive
            site_id = site_name(index)
            scenes, bbox, geo, first_day = _site_scenes(index, positive, size, master_seed)
            for day, scene in scenes:
                path = out_dir / "scenes" / site_id / f"day_{(day - first_day).days:03d}.lsrs"
                summary.scene_files.append(write_raster(path, scene))
            if positive:
                entries.append(_catalog_entry(site_id, bbox, geo, first_day + timedelta(days=EVENT_DAY)))
                truth_lines.append(f"{site_id};1;{bbox.x};{bbox.y};{bbox.w};{bbox.h}")
                summary.positive_sites.append(site_id)
            else:
                truth_lines.append(f"{site_id};0;;;;")
                summary.negative_sites.append(site_id)
            logger.debug(f"generated {site_id}", label=int(positive))
        summary.catalog_path.write_text(serialize_catalog(entries), encoding="utf-8")
        summary.truth_path.write_text("\n".join(truth_lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot write synthetic dataset under {out_dir}: {e}") from e

    logger.info(
        f"Generated {len(summary.sites)} synthetic sites",
        positives=n_positive, negatives=n_negative, size=size, out=str(out_dir),
    )
    return summary


def read_truth(path: Union[str, Path]) -> dict:
    """site_id -> (label, bbox or None) from a truth sidecar"""
    path = Path(path)
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines or lines[0] != TRUTH_HEADER:
        raise DataError(f"{path}: expected header {TRUTH_HEADER}")
    truth = {}
    for number, line in enumerate(lines[1:], start=2):
        fields = line.split(";")
        if len(fields) != 6:
            raise DataError(f"{path} line {number}: expected 6 fields, got {len(fields)}")
        bbox = None
        if fields[2]:
            x, y, w, h = (int(v) for v in fields[2:])
            bbox = PixelRect(x=x, y=y, w=w, h=h)
        truth[fields[0]] = (int(fields[1]), bbox)
    return truth
