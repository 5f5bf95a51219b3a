import numpy as np
import pytest
from pydantic import ValidationError

from landslide_framework.config import TrainConfig
from landslide_framework.data import load_sites, parse_catalog
from landslide_framework.exceptions import GeometryError
from landslide_framework.models import SizeClass
from landslide_framework.synthetic import (
    ScarSpec, SceneSpec, generate_dataset, generate_scene_pair, heuristic_classify, heuristic_score, read_truth,
)
from landslide_framework.synthetic.scenes import CLOUD_VALUE
from landslide_framework.training import balanced_accuracy, confusion_counts
from landslide_framework.utils.validation import validate_tile_pair


def _scar(**overrides):
    return ScarSpec(**{"center_x": 32.0, "center_y": 30.0, "length_px": 18.0, "width_px": 6.0,
                       "orientation_deg": 30.0, **overrides})


def test_identity_spec_changes_nothing():
    before, after, truth = generate_scene_pair(SceneSpec(seed=5))
    np.testing.assert_array_equal(before.planes, after.planes)
    assert truth.label == 0 and truth.scar_bbox is None
    assert after.cloud_mask is None


@pytest.mark.parametrize("delta", [0.9, 1.07, 1.3])
def test_illumination_change_is_spatially_uniform(delta):
    before, after, truth = generate_scene_pair(SceneSpec(seed=6, illumination_delta=delta))
    assert truth.label == 0
    ratio = after.planes.astype(np.float64) / before.planes.astype(np.float64)
    for band_ratio in ratio:
        assert band_ratio.std() / band_ratio.mean() < 1e-6
        assert band_ratio.mean() == pytest.approx(delta, rel=1e-6)


def test_scar_changes_only_its_footprint():
    before, after, truth = generate_scene_pair(SceneSpec(seed=5, has_landslide=True, scar=_scar()))
    assert truth.label == 1
    diff = after.planes.astype(np.float64) - before.planes
    assert not np.any(diff[:, ~truth.scar_mask])
    box = truth.scar_bbox
    assert box.fits(64, 64)
    assert np.all(truth.scar_mask[box.y:box.y + box.h, box.x:box.x + box.w].any(axis=0))
    inside = diff[before.band_ids.index(12)][truth.scar_mask]
    assert inside.mean() > 300.0
    nir = diff[before.band_ids.index(8)][truth.scar_mask]
    assert nir.mean() < 0.0


def test_scar_box_is_tight_around_mask():
    _, _, truth = generate_scene_pair(SceneSpec(seed=2, has_landslide=True, scar=_scar(orientation_deg=0.0)))
    rows, cols = np.flatnonzero(truth.scar_mask.any(axis=1)), np.flatnonzero(truth.scar_mask.any(axis=0))
    box = truth.scar_bbox
    assert (box.x, box.y, box.x + box.w - 1, box.y + box.h - 1) == (cols[0], rows[0], cols[-1], rows[-1])


def test_coarse_band_is_block_constant():
    before, after, _ = generate_scene_pair(SceneSpec(seed=8, has_landslide=True, scar=_scar()))
    for scene in (before, after):
        swir = scene.band(12)
        np.testing.assert_array_equal(swir[0::2, 0::2], swir[1::2, 1::2])


def test_generation_is_deterministic():
    spec = SceneSpec(seed=3, has_landslide=True, scar=_scar(), illumination_delta=1.05, cloud_fraction=0.1)
    first, second = generate_scene_pair(spec), generate_scene_pair(spec)
    for a, b in zip(first[:2], second[:2]):
        assert a.planes.tobytes() == b.planes.tobytes()
    np.testing.assert_array_equal(first[2].scar_mask, second[2].scar_mask)


def test_clouds_cover_requested_fraction():
    _, after, _ = generate_scene_pair(SceneSpec(seed=4, cloud_fraction=0.2))
    assert after.cloud_mask.mean() >= 0.2
    assert np.all(after.planes[:, after.cloud_mask] == CLOUD_VALUE)


def test_scene_spec_validation():
    with pytest.raises(ValidationError):
        SceneSpec(has_landslide=True)
    with pytest.raises(ValidationError):
        SceneSpec(size=63)
    with pytest.raises(ValidationError):
        SceneSpec(before_timestamp=5, after_timestamp=5)


def test_scar_must_fit_scene():
    with pytest.raises(GeometryError, match="does not fit"):
        generate_scene_pair(SceneSpec(has_landslide=True, scar=_scar(center_x=2.0)))


def test_heuristic_score_sees_concentrated_change(pair_factory):
    positive = pair_factory(1, size=16)
    # a brightened blue band would read as cloud
    positive.after[0] = positive.before[0]
    negative = pair_factory(0, size=16)
    assert heuristic_score(positive.before, positive.after, positive.bbox) > 0.3
    assert abs(heuristic_score(negative.before, negative.after, None)) < 0.01


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("synthetic")
    return generate_dataset(16, 16, 64, master_seed=21, out_dir=out)


def test_dataset_layout(dataset):
    assert len(dataset.positive_sites) == 16 and len(dataset.negative_sites) == 16
    assert len(dataset.scene_files) == 96
    entries = parse_catalog(dataset.catalog_path.read_text())
    assert len(entries) == 16
    assert {e.size_class for e in entries} == {SizeClass.VERY_LARGE}
    truth = read_truth(dataset.truth_path)
    assert sorted(truth) == sorted(dataset.sites)
    assert all(truth[s][0] == 1 and truth[s][1] is not None for s in dataset.positive_sites)
    assert all(truth[s] == (0, None) for s in dataset.negative_sites)


def test_empty_dataset(tmp_path):
    summary = generate_dataset(0, 0, 64, master_seed=0, out_dir=tmp_path)
    assert summary.sites == []
    assert parse_catalog(summary.catalog_path.read_text()) == []


def test_dataset_is_reproducible(tmp_path):
    first = generate_dataset(2, 1, 32, master_seed=5, out_dir=tmp_path / "a")
    second = generate_dataset(2, 1, 32, master_seed=5, out_dir=tmp_path / "b")
    for a, b in zip(first.scene_files, second.scene_files):
        assert a.read_bytes() == b.read_bytes()
    assert first.catalog_path.read_text() == second.catalog_path.read_text()


def test_prepared_pairs_are_valid_and_grouped(dataset):
    sites = load_sites(dataset.out_dir, TrainConfig(tile_size=64, tiles_per_site=2))
    assert sorted(sites) == sorted(dataset.sites)
    for site, pairs in sites.items():
        for pair in pairs:
            validate_tile_pair(pair)
            assert pair.source_site == site
        labels = sorted(p.label for p in pairs)
        assert labels == ([0, 0, 1, 1] if site in dataset.positive_sites else [0, 0])


def test_heuristic_separates_classes(dataset):
    sites = load_sites(dataset.out_dir, TrainConfig(tile_size=64, tiles_per_site=2))
    pairs = [p for site in sorted(sites) for p in sites[site]]
    predicted = heuristic_classify(pairs)
    assert balanced_accuracy(confusion_counts(predicted, [p.label for p in pairs])) >= 0.95
