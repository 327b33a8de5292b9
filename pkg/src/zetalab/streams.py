"""Task-keyed random streams.

Every random draw in the package comes from a generator keyed by the master
seed plus a tuple naming the task (model tag, replica, block, ...). Results
therefore do not depend on the order in which tasks are scheduled.
"""
from __future__ import annotations

import zlib

import numpy as np


def _tag(name: str) -> int:
    return zlib.crc32(name.encode("ascii"))


def stream(seed: int, name: str, *key: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=(_tag(name),) + tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
