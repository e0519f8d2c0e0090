"""Seeding contract.

Every random stream is keyed by ``(master_seed, replicate_index, tag)``:
``SeedSequence(entropy=master_seed, spawn_key=(replicate_index, crc32(tag)))``
feeds a PCG64 generator.  Streams for different replicates or purposes are
therefore independent and reproducible regardless of scheduling.
"""

from __future__ import annotations

import secrets
import zlib

import numpy as np

from .errors import UsageError

SEED_BITS = 63


def tag_id(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def seed_sequence(master_seed: int, replicate: int = 0, tag: str = "run") -> np.random.SeedSequence:
    if master_seed < 0 or replicate < 0:
        raise UsageError(f"seeds and replicate indices must be non-negative ({master_seed}, {replicate})")
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(replicate), tag_id(tag)))


def stream(master_seed: int, replicate: int = 0, tag: str = "run") -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(master_seed, replicate, tag)))


def derive_seed(master_seed: int, replicate: int, tag: str = "replicate") -> int:
    """A 63-bit seed for one replicate, usable as the seed of a nested run."""
    state = seed_sequence(master_seed, replicate, tag).generate_state(1, np.uint64)[0]
    return int(state) & ((1 << SEED_BITS) - 1)


def random_seed() -> int:
    return secrets.randbits(SEED_BITS)
