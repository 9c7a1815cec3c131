"""Explicitly seeded random streams."""

from enum import IntEnum

import numpy as np
from randomgen import Xoshiro256


class Stream(IntEnum):
    """First spawn-key entry of every consumer of randomness."""

    PARAMS = 1
    CLASS_HEAD = 2
    VALIDATION = 3
    EPOCH = 4
    LABELS = 5
    EVALUATION = 6
    SHAPES = 7
    TEXTURED_MNIST = 8
    VISUALIZATION = 9


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    Generator for one independent stream.

    The stream path (e.g. ``Stream.SHAPES, split, index``) becomes the spawn
    key of a ``SeedSequence`` over ``seed``; distinct paths give independent
    xoshiro256** states, so per-example streams can be drawn in any order or
    in parallel without changing the output.

    Args:
        seed: Non-negative base seed.
        stream: Non-negative stream path.

    Returns:
        xoshiro256**-backed numpy Generator.
    """
    if seed < 0 or any(s < 0 for s in stream):
        raise ValueError("seed and stream must be non-negative")
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(Xoshiro256(sequence))
