"""Reproducible seed derivation.

Every random stream in the pipeline is keyed by (master_seed, *keys) so
sites, folds and epochs get independent but repeatable generators.
"""
import zlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _key_int(key: Key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    return int(key) & 0xFFFFFFFF


def derive_seed(master_seed: int, *keys: Key) -> int:
    """Mix keys into a master seed; returns a 63-bit integer"""
    sequence = np.random.SeedSequence(entropy=int(master_seed) & ((1 << 63) - 1), spawn_key=tuple(_key_int(k) for k in keys))
    state = sequence.generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def derive_rng(master_seed: int, *keys: Key) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *keys))
