"""Deterministic RNG stream derivation.

Every random quantity is drawn from a stream keyed by ``(seed, label,
*indices)``.  The key goes through ``numpy.random.SeedSequence`` with the
label reduced by CRC32, so streams are stable across runs and independent of
the order in which parallel cells are scheduled.
"""
import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def stream(seed: int, label: str = "", *indices: int) -> np.random.Generator:
    key = (zlib.crc32(label.encode("utf-8")),) + tuple(int(i) & MASK64 for i in indices)
    ss = np.random.SeedSequence(entropy=int(seed) & MASK64, spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(0 if rng is None else int(rng))
