"""Shared fixtures and numeric oracles for the test suite"""
import os
from typing import Callable, Optional, Sequence

import numpy as np
import pytest

from landslide_framework.data.pairs import TilePair
from landslide_framework.data.raster import RasterScene
from landslide_framework.model import NetworkConfig
from landslide_framework.models import LogLevel, PixelRect
from landslide_framework.utils.logging import ConsoleRunLogger, set_logger

FD_STEP = 1e-5
GRAD_FLOOR = 1e-6

slow = pytest.mark.skipif(os.getenv("LSW_RUN_SLOW") != "1", reason="set LSW_RUN_SLOW=1 for full acceptance runs")


@pytest.fixture(autouse=True)
def quiet_logger():
    """Keep test output readable; warnings still print"""
    set_logger(ConsoleRunLogger("test", level=LogLevel.QUIET))
    yield


def numerical_gradient(loss_fn: Callable[[], float], array: np.ndarray, index: tuple, step: float = FD_STEP) -> float:
    """Central difference of loss_fn with respect to array[index], restoring the entry afterwards"""
    original = array[index]
    array[index] = original + step
    plus = loss_fn()
    array[index] = original - step
    minus = loss_fn()
    array[index] = original
    return (plus - minus) / (2.0 * step)


def relative_error(analytic: float, numeric: float, floor: float = GRAD_FLOOR) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def naive_conv3d(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray, stride=(1, 1, 1), padding=(0, 0, 0)) -> np.ndarray:
    """Cross-correlation by explicit loops over every output position"""
    n, c, d, h, w = x.shape
    f, _, kd, kh, kw = kernel.shape
    sd, sh, sw = stride
    pd, ph, pw = padding
    padded = np.pad(x.astype(np.float64), ((0, 0), (0, 0), (pd, pd), (ph, ph), (pw, pw)))
    od = (d + 2 * pd - kd) // sd + 1
    oh = (h + 2 * ph - kh) // sh + 1
    ow = (w + 2 * pw - kw) // sw + 1
    out = np.zeros((n, f, od, oh, ow))
    for b in range(n):
        for o in range(f):
            for i in range(od):
                for j in range(oh):
                    for k in range(ow):
                        window = padded[b, :, i * sd:i * sd + kd, j * sh:j * sh + kh, k * sw:k * sw + kw]
                        out[b, o, i, j, k] = np.sum(window * kernel[o]) + bias[o]
    return out


@pytest.fixture
def tiny_config() -> NetworkConfig:
    """Eight learned layers on 8-pixel, 2-band tiles at 64-bit precision"""
    return NetworkConfig.tiny(dtype="float64", init_seed=7)


def make_pair(
    label: int,
    size: int = 8,
    bands: int = 5,
    seed: int = 0,
    site: str = "site_a",
    bbox: Optional[PixelRect] = None,
) -> TilePair:
    """Random tile pair in [0, 1]; positives get a bright square change inside bbox"""
    rng = np.random.default_rng(seed)
    before = rng.uniform(0.05, 0.5, size=(bands, size, size)).astype(np.float32)
    after = (before * 1.02).astype(np.float32)
    if label == 1:
        bbox = bbox or PixelRect(x=size // 4, y=size // 4, w=size // 2, h=size // 2)
        after[:, bbox.y:bbox.y + bbox.h, bbox.x:bbox.x + bbox.w] += 0.4
        after = np.clip(after, 0.0, 1.0)
    return TilePair(
        before=before, after=after, label=label, source_site=site,
        before_timestamp=1_000, after_timestamp=2_000, bbox=bbox if label == 1 else None,
    )


@pytest.fixture
def pair_factory():
    return make_pair


def make_scene(
    size: int = 32,
    timestamp: int = 0,
    bands: Sequence[int] = (2, 3, 4, 8, 12),
    seed: int = 0,
    cloud_mask: Optional[np.ndarray] = None,
    natives: Optional[Sequence[int]] = None,
) -> RasterScene:
    """Random reflectance scene; coarse bands are block-constant so they survive a round trip"""
    rng = np.random.default_rng(seed)
    natives = list(natives) if natives is not None else [20 if b == 12 else 10 for b in bands]
    grid = min(natives)
    planes = np.empty((len(bands), size, size), dtype=np.float32)
    for index, native in enumerate(natives):
        factor = native // grid
        coarse = rng.uniform(0.0, 5000.0, size=(-(-size // factor), -(-size // factor)))
        planes[index] = np.repeat(np.repeat(coarse, factor, axis=0), factor, axis=1)[:size, :size]
    return RasterScene(
        band_ids=list(bands),
        planes=planes,
        timestamp=timestamp,
        geo_transform=(10.0, 0.001, 0.0, 45.0, 0.0, -0.001),
        native_resolutions_m=natives,
        cloud_mask=cloud_mask,
    )


@pytest.fixture
def scene_factory():
    return make_scene
