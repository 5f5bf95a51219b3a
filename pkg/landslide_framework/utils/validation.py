"""Invariant checks shared by the pipeline and the tests"""
import hashlib
from typing import Dict, Sequence

import numpy as np

from ..exceptions import GeometryError, LabelError, LeakageError


def validate_tile_pair(pair) -> None:
    """Raise if a TilePair breaks any of its invariants"""
    if pair.label not in (0, 1):
        raise LabelError(f"pair from {pair.source_site}: label {pair.label} is not 0 or 1")
    if pair.before.shape != pair.after.shape:
        raise GeometryError(f"pair from {pair.source_site}: before {pair.before.shape} vs after {pair.after.shape}")
    if pair.before.ndim != 3 or pair.before.shape[1] != pair.before.shape[2]:
        raise GeometryError(f"pair from {pair.source_site}: stacks must be [bands, T, T], got {pair.before.shape}")
    if pair.before_timestamp >= pair.after_timestamp:
        raise GeometryError(
            f"pair from {pair.source_site}: before timestamp {pair.before_timestamp} "
            f"not earlier than after timestamp {pair.after_timestamp}"
        )
    if pair.label == 1:
        if pair.bbox is None:
            raise GeometryError(f"positive pair from {pair.source_site} has no landslide box")
        if not pair.bbox.fits(pair.tile_size, pair.tile_size):
            raise GeometryError(f"pair from {pair.source_site}: box {pair.bbox} leaves the {pair.tile_size} tile")
    elif pair.bbox is not None:
        raise GeometryError(f"negative pair from {pair.source_site} carries a landslide box")
    for name, stack in (("before", pair.before), ("after", pair.after)):
        if not np.all(np.isfinite(stack)) or stack.min() < 0.0 or stack.max() > 1.0:
            raise GeometryError(f"pair from {pair.source_site}: {name} values must be finite and in [0, 1]")


def pair_digest(pair) -> str:
    """Content hash of a pair's pixels, independent of its metadata"""
    digest = hashlib.sha256()
    for stack in (pair.before, pair.after):
        array = np.ascontiguousarray(stack, dtype=np.float32)
        digest.update(str(array.shape).encode("ascii"))
        digest.update(array.tobytes())
    return digest.hexdigest()


def check_grouping(train_pairs: Sequence, eval_pairs: Sequence) -> None:
    """Reject shared sites or identical tile content across a train/eval split"""
    train_sites = {p.source_site for p in train_pairs}
    shared = sorted(train_sites & {p.source_site for p in eval_pairs})
    if shared:
        raise LeakageError(f"sites in both training and evaluation: {', '.join(shared)}")
    train_digests: Dict[str, str] = {pair_digest(p): p.source_site for p in train_pairs}
    for pair in eval_pairs:
        origin = train_digests.get(pair_digest(pair))
        if origin is not None:
            raise LeakageError(
                f"evaluation tile from {pair.source_site} duplicated in training (listed under {origin})"
            )
