"""Named RNG substreams derived from one master seed.

Every random choice in the engine flows from a master seed through a named
substream so components can be re-run in isolation and runs are reproducible
bit for bit.
"""

from __future__ import annotations

import zlib

import numpy as np

STREAMS = ("dataset", "step1", "step3", "shots")


def substream(master_seed: int, name: str) -> np.random.Generator:
    """Generator for a named child stream of `master_seed`.

    Distinct names give statistically independent streams (SeedSequence
    entropy mixing); identical (seed, name) pairs give identical streams on
    every platform.
    """
    tag = zlib.crc32(name.encode("utf-8"))
    ss = np.random.SeedSequence(entropy=int(master_seed) & 0xFFFFFFFFFFFFFFFF,
                                spawn_key=(tag,))
    return np.random.default_rng(ss)
