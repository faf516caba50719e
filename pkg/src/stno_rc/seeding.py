"""Deterministic seed derivation and RNG construction.

Every stochastic component draws from numpy's counter-based Philox generator,
and sub-seeds are derived with a splitmix64 chain, so each simulation (or each
sweep cell) is bit-reproducible in isolation.  The derivation scheme is part
of the reproducibility contract and is documented in FORMATS.md.
"""

from __future__ import annotations

import struct

import numpy as np

_MASK64 = (1 << 64) - 1

# stream tags for the sub-generators of a single pipeline run
STREAM_TASK = 1
STREAM_NOISE = 2
STREAM_SPLIT = 3


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def hash64(*parts: int) -> int:
    """Fold 64-bit integer parts into one seed (order-sensitive)."""
    h = 0x243F6A8885A308D3
    for part in parts:
        h = _splitmix64(h ^ (int(part) & _MASK64))
    return h


def float_key(x: float) -> int:
    """IEEE-754 bit pattern of a float, for value-keyed (position-independent)
    cell seeds: subsetting a grid does not change any cell's seed."""
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def substream(seed: int, tag: int) -> int:
    return hash64(seed, tag)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))
