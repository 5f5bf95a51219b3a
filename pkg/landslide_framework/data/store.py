"""Prepared tile-pair store.

One directory per site holding ``before.npy``, ``after.npy`` (both
[pairs, bands, T, T] float32), ``labels.npy`` (int8), ``bboxes.npy``
([pairs, 4] int32, -1 when absent) and ``timestamps.npy`` ([pairs, 2]
int64), plus a ';'-separated ``manifest.csv`` at the top level.
"""
from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from ..exceptions import DataError
from ..models import PixelRect
from .pairs import TilePair

MANIFEST = "manifest.csv"
MANIFEST_HEADER = "site_id;pairs;positives;negatives;tile_size;bands"
NO_BBOX = (-1, -1, -1, -1)

SitePairs = Dict[str, List[TilePair]]


def is_pair_store(directory: Union[str, Path]) -> bool:
    return (Path(directory) / MANIFEST).is_file()


def write_pair_store(out_dir: Union[str, Path], sites: SitePairs) -> Path:
    out_dir = Path(out_dir)
    lines = [MANIFEST_HEADER]
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for site_id in sorted(sites):
            pairs = sites[site_id]
            if not pairs:
                continue
            site_dir = out_dir / site_id
            site_dir.mkdir(exist_ok=True)
            np.save(site_dir / "before.npy", np.stack([p.before for p in pairs]).astype(np.float32))
            np.save(site_dir / "after.npy", np.stack([p.after for p in pairs]).astype(np.float32))
            np.save(site_dir / "labels.npy", np.array([p.label for p in pairs], dtype=np.int8))
            np.save(site_dir / "bboxes.npy", np.array(
                [(p.bbox.x, p.bbox.y, p.bbox.w, p.bbox.h) if p.bbox else NO_BBOX for p in pairs], dtype=np.int32,
            ))
            np.save(site_dir / "timestamps.npy", np.array(
                [(p.before_timestamp, p.after_timestamp) for p in pairs], dtype=np.int64,
            ))
            positives = sum(p.label for p in pairs)
            lines.append(
                f"{site_id};{len(pairs)};{positives};{len(pairs) - positives};{pairs[0].tile_size};{pairs[0].band_count}"
            )
        (out_dir / MANIFEST).write_text("\n".join(lines) + "\n")
    except OSError as e:
        raise DataError(f"cannot write pair store {out_dir}: {e}") from e
    return out_dir


def read_pair_store(data_dir: Union[str, Path]) -> SitePairs:
    data_dir = Path(data_dir)
    manifest = data_dir / MANIFEST
    if not manifest.is_file():
        raise DataError(f"{data_dir}: no {MANIFEST}, not a prepared pair store")
    rows = [line for line in manifest.read_text().splitlines() if line.strip()]
    if not rows or rows[0] != MANIFEST_HEADER:
        raise DataError(f"{manifest}: unexpected header, expected {MANIFEST_HEADER}")

    sites: SitePairs = {}
    for number, row in enumerate(rows[1:], start=2):
        fields = row.split(";")
        if len(fields) != 6:
            raise DataError(f"{manifest} line {number}: expected 6 fields, got {len(fields)}")
        site_id, count = fields[0], int(fields[1])
        site_dir = data_dir / site_id
        try:
            before = np.load(site_dir / "before.npy")
            after = np.load(site_dir / "after.npy")
            labels = np.load(site_dir / "labels.npy")
            bboxes = np.load(site_dir / "bboxes.npy")
            timestamps = np.load(site_dir / "timestamps.npy")
        except (OSError, ValueError) as e:
            raise DataError(f"{site_dir}: cannot load pair arrays: {e}") from e
        if not (len(before) == len(after) == len(labels) == len(bboxes) == len(timestamps) == count):
            raise DataError(f"{site_dir}: array lengths disagree with manifest count {count}")
        sites[site_id] = [
            TilePair(
                before=before[i],
                after=after[i],
                label=int(labels[i]),
                source_site=site_id,
                before_timestamp=int(timestamps[i, 0]),
                after_timestamp=int(timestamps[i, 1]),
                bbox=None if tuple(bboxes[i]) == NO_BBOX else PixelRect(
                    x=int(bboxes[i, 0]), y=int(bboxes[i, 1]), w=int(bboxes[i, 2]), h=int(bboxes[i, 3]),
                ),
            )
            for i in range(count)
        ]
    return sites
