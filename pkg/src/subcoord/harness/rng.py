"""Hierarchical counter-based random streams.

Every stream derives from (root seed, path of labels) through numpy's
SeedSequence and the counter-based Philox generator, so parallel workers
can open disjoint, reproducible streams without sharing state.  String
labels hash through crc32 to stable integers.
"""

from __future__ import annotations

import zlib

import numpy as np


def _label(token):
    if isinstance(token, (int, np.integer)):
        return int(token)
    if isinstance(token, str):
        return zlib.crc32(token.encode())
    raise TypeError(f"stream path tokens must be ints or strings, got {type(token)}")


def stream(root_seed, *path):
    """Independent generator for (root seed, path)."""
    seq = np.random.SeedSequence(int(root_seed), spawn_key=tuple(_label(t) for t in path))
    return np.random.Generator(np.random.Philox(seq))
