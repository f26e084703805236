"""Reproducible random streams.

A stream is fully determined by (master_seed, stream_id); distinct stream ids
give statistically independent substreams of one master seed, so parallel
consumers can each own a stream. Normal variates use Box-Muller on the
stream's uniforms, which reproduces bit-exactly on any platform.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["SeededStream"]


@dataclass(frozen=True)
class SeededStream:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.stream_id < 0:
            raise ValueError(f"stream_id must be nonnegative, got {self.stream_id}")

    def generator(self):
        """Fresh numpy Generator; every call restarts the stream."""
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.master_seed, self.stream_id]))
        )

    def substream(self, stream_id):
        return SeededStream(self.master_seed, int(stream_id))


def box_muller(rng, n):
    """n standard-normal draws via Box-Muller from the generator's uniforms."""
    pairs = (n + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    # rng.random() lies in [0, 1); reflect to (0, 1] so log is finite
    radius = np.sqrt(-2.0 * np.log(1.0 - u1))
    angle = 2.0 * math.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:n]
