"""Turn a catalog plus per-site scene directories into labeled tile pairs.

Scenes live at ``<scenes_dir>/<site_id>/*.lsrs``. A site is matched to the
first catalog entry whose point falls inside its footprint; scenes before
the event day are pre-event, the rest post-event. Unmatched sites only
contribute negative pairs.
"""
import calendar
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..config import TrainConfig
from ..exceptions import DataError
from ..models import CatalogEntry
from ..seeding import derive_rng
from ..utils.logging import get_logger
from .bands import SENTINEL2_BANDS
from .catalog import FilterCriteria, filter_catalog, parse_catalog
from .pairs import TilePair, build_negative_pairs, catalog_bbox, sample_window
from .raster import RasterScene, load_raster
from .store import SitePairs, is_pair_store, read_pair_store, write_pair_store

CATALOG_FILE = "catalog.csv"
SCENES_DIR = "scenes"
SCENE_SUFFIX = ".lsrs"


def event_timestamp(entry: CatalogEntry) -> int:
    """Start of the event day, seconds since epoch (UTC)"""
    return calendar.timegm(entry.event_date.timetuple())


def load_site_scenes(scenes_dir: Union[str, Path]) -> Dict[str, List[RasterScene]]:
    scenes_dir = Path(scenes_dir)
    if not scenes_dir.is_dir():
        raise DataError(f"scene directory {scenes_dir} not found")
    sites: Dict[str, List[RasterScene]] = {}
    for site_dir in sorted(p for p in scenes_dir.iterdir() if p.is_dir()):
        files = sorted(site_dir.glob(f"*{SCENE_SUFFIX}"))
        if files:
            sites[site_dir.name] = sorted((load_raster(f) for f in files), key=lambda s: s.timestamp)
    return sites


def match_entry(entries: Sequence[CatalogEntry], scenes: Sequence[RasterScene]) -> Optional[CatalogEntry]:
    reference = scenes[0]
    for entry in entries:
        if reference.contains(entry.longitude, entry.latitude):
            return entry
    return None


def split_by_event(scenes: Sequence[RasterScene], entry: CatalogEntry) -> Tuple[List[RasterScene], List[RasterScene]]:
    cutoff = event_timestamp(entry)
    return [s for s in scenes if s.timestamp < cutoff], [s for s in scenes if s.timestamp >= cutoff]


def build_site_pairs(
    site_id: str,
    scenes: Sequence[RasterScene],
    entry: Optional[CatalogEntry],
    cfg: TrainConfig,
    bands: Sequence[int] = SENTINEL2_BANDS,
) -> List[TilePair]:
    logger = get_logger()
    tile = cfg.tile_size
    pre_event = list(scenes)
    pairs: List[TilePair] = []

    if entry is not None:
        pre_event, post_event = split_by_event(scenes, entry)
        if pre_event and post_event:
            before, after = pre_event[-1], post_event[0]
            bbox = catalog_bbox(entry, before)
            rng = derive_rng(cfg.master_seed, "site", site_id, "positive")
            for _ in range(cfg.tiles_per_site):
                pairs.append(sample_window(
                    before, after, bbox, tile, rng,
                    site=site_id, bands=bands, max_cloud_fraction=cfg.max_cloud_fraction,
                ))
        else:
            logger.warning(f"site {site_id}: no scenes on both sides of the event, skipping positives",
                           event=entry.event_date.isoformat())

    if len(pre_event) >= 2:
        rng = derive_rng(cfg.master_seed, "site", site_id, "negative")
        pairs.extend(build_negative_pairs(
            pre_event, tile, cfg.tiles_per_site, rng,
            site=site_id, bands=bands, max_cloud_fraction=cfg.max_cloud_fraction,
        ))
    else:
        logger.warning(f"site {site_id}: fewer than 2 pre-event scenes, no negative pairs")
    logger.debug(f"site {site_id}: built {len(pairs)} pairs", positives=sum(p.label for p in pairs))
    return pairs


def prepare_dataset(
    catalog_path: Union[str, Path],
    scenes_dir: Union[str, Path],
    cfg: TrainConfig,
    out_dir: Optional[Union[str, Path]] = None,
    criteria: Optional[FilterCriteria] = None,
) -> SitePairs:
    """Build every site's pairs and optionally write the prepared store"""
    catalog_path = Path(catalog_path)
    try:
        text = catalog_path.read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read catalog {catalog_path}: {e}") from e
    entries = filter_catalog(parse_catalog(text), criteria)
    site_scenes = load_site_scenes(scenes_dir)

    sites: SitePairs = {}
    for site_id, scenes in site_scenes.items():
        pairs = build_site_pairs(site_id, scenes, match_entry(entries, scenes), cfg)
        if pairs:
            sites[site_id] = pairs
    get_logger().info(
        f"Prepared {sum(len(p) for p in sites.values())} pairs",
        sites=len(sites), catalog_entries=len(entries), tile=cfg.tile_size,
    )
    if out_dir is not None:
        write_pair_store(out_dir, sites)
    return sites


def load_sites(data_dir: Union[str, Path], cfg: TrainConfig) -> SitePairs:
    """Read a prepared store, or prepare a raw catalog + scenes directory in memory"""
    data_dir = Path(data_dir)
    if is_pair_store(data_dir):
        return read_pair_store(data_dir)
    if (data_dir / CATALOG_FILE).is_file() and (data_dir / SCENES_DIR).is_dir():
        return prepare_dataset(data_dir / CATALOG_FILE, data_dir / SCENES_DIR, cfg)
    raise DataError(f"{data_dir}: neither a prepared pair store nor a catalog + scenes directory")
