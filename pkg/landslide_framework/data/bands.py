from typing import List, Sequence

import numpy as np

from ..exceptions import BandError
from .raster import RasterScene

# Visible (2, 3, 4), near infrared (8) and shortwave infrared (12)
SENTINEL2_BANDS = (2, 3, 4, 8, 12)
RGB_BANDS = (4, 3, 2)

REFLECTANCE_CEILING = 10000.0


def band_indices(scene: RasterScene, wanted: Sequence[int]) -> List[int]:
    for band in wanted:
        if band not in scene.band_ids:
            raise BandError(band, scene.band_ids)
    return [scene.band_ids.index(b) for b in wanted]


def select_bands(scene: RasterScene, wanted: Sequence[int] = SENTINEL2_BANDS) -> np.ndarray:
    """Stack the wanted bands in exactly the requested order"""
    return scene.planes[band_indices(scene, wanted)]


def normalize(stack: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(stack, dtype=np.float32) / np.float32(REFLECTANCE_CEILING), 0.0, 1.0)
