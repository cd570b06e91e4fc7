"""Named RNG sub-streams derived from one run seed."""

import zlib

import numpy as np


def stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def substream(seed: int, name: str, *index: int) -> np.random.Generator:
    """Independent generator for ``(seed, name, *index)``.

    The same triple always yields the same stream, whatever else the run draws,
    so partial reruns and thread counts cannot shift the numbers.
    """
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, stream_key(name), *map(int, index)])
