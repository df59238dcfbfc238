"""Counter-based random streams with a (master_seed, stream_index) address.

Philox keys are 128 bits, so the pair embeds directly: identical pairs give
bit-identical streams on any platform, and distinct indices give independent
streams. Ensemble simulations assign stream_index = trajectory index, which
makes any single trajectory reproducible in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _philox(master_seed: int, stream_index: int) -> np.random.Generator:
    key = (int(stream_index) << 64) | (int(master_seed) & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class RngStream:
    """One addressed random stream.

    Attributes
    ----------
    master_seed : int
        64-bit run seed shared by every stream of a run.
    stream_index : int
        Index of this stream within the run (trajectory id for ensembles).
    """

    master_seed: int
    stream_index: int = 0
    gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if not 0 <= int(self.stream_index) < 2**64:
            raise ValueError("stream_index must fit in 64 bits")
        self.gen = _philox(self.master_seed, self.stream_index)

    def reset(self) -> None:
        """Rewind the stream to its initial state."""
        self.gen = _philox(self.master_seed, self.stream_index)

    def spawn(self, stream_index: int) -> "RngStream":
        """A sibling stream under the same master seed."""
        return RngStream(self.master_seed, stream_index)
