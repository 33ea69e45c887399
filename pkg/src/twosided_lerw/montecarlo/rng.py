"""Reproducible random streams.

Every chunk of samples draws from its own Philox generator keyed by
``(seed, stream_id, spawn_key..., chunk)``, so results do not depend on how
chunks are scheduled over threads.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "ALGORITHM"]

ALGORITHM = "philox4x64-10"


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0
    spawn_key: tuple = ()

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")

    @property
    def algorithm(self) -> str:
        return ALGORITHM

    def child(self, label: str) -> "RngStream":
        """An independent stream named by a string label."""
        return RngStream(self.seed, self.stream_id, self.spawn_key + (zlib.crc32(label.encode()),))

    def generator(self, chunk: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.spawn_key, chunk))
        return np.random.Generator(np.random.Philox(ss))
