"""Seed derivation tree.

Every random draw in the package comes from a Philox stream keyed by a
tuple of non-negative integers: ``(run_seed, trial, kind, index...)``.
Streams are independent of execution order, so trials can run in any
order or in parallel and still reproduce bit-for-bit.
"""
from __future__ import annotations

from typing import Sequence, Union

import numpy as np

# stream kinds, the third element of a key
SCREEN = 1
NOISE = 2
BITS = 3
DRAW = 4

SeedLike = Union[int, Sequence[int], np.random.Generator]


def as_key(seed: int | Sequence[int]) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        key = (int(seed),)
    else:
        key = tuple(int(s) for s in seed)
    if any(s < 0 for s in key):
        raise ValueError(f"seed components must be non-negative, got {key}")
    return key


def stream(seed: SeedLike, *path: int) -> np.random.Generator:
    """Return a Generator for ``seed`` extended by ``path``.

    A Generator passed as ``seed`` is returned unchanged (``path`` must then
    be empty); this lets callers hand in an already-derived stream.
    """
    if isinstance(seed, np.random.Generator):
        if path:
            raise ValueError("cannot extend an existing Generator with a path")
        return seed
    key = as_key(seed) + tuple(int(p) for p in path)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))
