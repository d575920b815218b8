#!/usr/bin/env python

"""Helper class to derive reproducible random streams."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class RngStream:
    """
    Random stream identified by (seed, stream_id).

    Generators depend only on the identifiers and the keys passed to generator(),
    never on the order in which trials are scheduled.
    """

    seed: int
    stream_id: int

    def generator(self, *keys: int) -> np.random.Generator:
        """
        Creates a generator for this stream.

        Args:
            keys: Further spawn keys distinguishing independent uses within a trial.

        Returns:
            A fresh generator; equal arguments give equal sequences.
        """
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *keys))
        return np.random.default_rng(sequence)


class UniformBuffer:
    """Serves uniforms on [0, 1) from blocks drawn from a generator."""

    def __init__(self, rng: np.random.Generator, *, block: Optional[int] = 4096):
        self.rng = rng
        self.block = block
        self.values = []
        self.index = 0

    def __call__(self) -> float:
        if self.index >= len(self.values):
            self.values = self.rng.random(self.block).tolist()
            self.index = 0
        value = self.values[self.index]
        self.index += 1
        return value
