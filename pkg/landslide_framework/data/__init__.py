from .bands import RGB_BANDS, SENTINEL2_BANDS, normalize, select_bands
from .catalog import FilterCriteria, filter_catalog, parse_catalog, serialize_catalog
from .dihedral import DihedralTransform
from .pairs import TilePair, build_negative_pairs, catalog_bbox, dihedral_augment, sample_window, scene_windows
from .prepare import load_sites, prepare_dataset
from .raster import RasterScene, load_raster, write_raster
from .store import read_pair_store, write_pair_store

__all__ = [
    'RGB_BANDS', 'SENTINEL2_BANDS', 'normalize', 'select_bands',
    'FilterCriteria', 'filter_catalog', 'parse_catalog', 'serialize_catalog',
    'DihedralTransform',
    'TilePair', 'build_negative_pairs', 'catalog_bbox', 'dihedral_augment', 'sample_window', 'scene_windows',
    'load_sites', 'prepare_dataset',
    'RasterScene', 'load_raster', 'write_raster',
    'read_pair_store', 'write_pair_store',
]
