"""Shapes: overlapping sprites (three by default) on a 20×20 binary canvas."""

from __future__ import annotations

import numpy as np

from packages.autodiff import Stream, make_rng
from packages.structured_logging import get_logger

from .models import DatasetBundle, DatasetKind, DatasetMetadata, split_stream

logger = get_logger(__name__)

CANVAS = 20
SPRITE = 8
PLACEMENTS = CANVAS - SPRITE + 1
SPRITES_PER_IMAGE = 3
MAX_OBJECTS = 255
DEFAULT_SPLIT_COUNTS = {"train": 60_000, "test": 10_000}


def _triangle_up() -> np.ndarray:
    rows, cols = np.mgrid[0:SPRITE, 0:SPRITE]
    return np.abs(cols - 3.5) <= (rows + 1) / 2.0


SPRITE_MASKS: dict[str, np.ndarray] = {
    "triangle_up": _triangle_up(),
    "triangle_down": _triangle_up()[::-1],
    "square": np.ones((SPRITE, SPRITE), dtype=bool),
}
SPRITE_ORDER = ("triangle_up", "triangle_down", "square")


def render_sprite_bitmap(name: str) -> str:
    """Sprite as text rows of '#' and '.'."""
    return "\n".join("".join("#" if on else "." for on in row) for row in SPRITE_MASKS[name])


def _draw_example(
    seed: int, split: str | None, index: int, objects: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = make_rng(seed, Stream.SHAPES, split_stream(split), index)
    coverage = np.zeros((CANVAS, CANVAS), dtype=np.int64)
    labels = np.zeros((CANVAS, CANVAS), dtype=np.uint8)
    for instance in range(1, objects + 1):
        sprite = SPRITE_MASKS[SPRITE_ORDER[int(rng.integers(len(SPRITE_ORDER)))]]
        row = int(rng.integers(PLACEMENTS))
        col = int(rng.integers(PLACEMENTS))
        window = (slice(row, row + SPRITE), slice(col, col + SPRITE))
        coverage[window] += sprite
        labels[window][sprite] = instance
    image = (coverage > 0).astype(np.float64)
    ignore = (coverage == 0) | (coverage >= 2)
    return image.ravel(), labels.ravel(), ignore.ravel()


def generate_shapes(
    count: int,
    seed: int,
    split: str | None = None,
    objects: int = SPRITES_PER_IMAGE,
) -> DatasetBundle:
    """
    Generate binary Shapes images.

    Each sprite draws its type uniformly from △, ▽, □ and a position that
    keeps it inside the canvas. Later sprites occlude earlier ones for
    labeling; background and pixels covered by two or more sprites are
    ignored when scoring. Example i of a split draws from the stream
    ``(SHAPES, split, i)``, so splits of one seed never share images by
    construction.

    Args:
        count: Number of images (>= 1).
        seed: Generator seed.
        split: None, "train", "validation" or "test".
        objects: Sprites per image, 1..MAX_OBJECTS.

    Returns:
        Bundle with [count, 400] inputs.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 1 <= objects <= MAX_OBJECTS:
        raise ValueError(f"objects must be in 1..{MAX_OBJECTS}, got {objects}")
    split_stream(split)

    images = np.empty((count, CANVAS * CANVAS))
    labels = np.empty((count, CANVAS * CANVAS), dtype=np.uint8)
    ignore = np.empty((count, CANVAS * CANVAS), dtype=bool)
    for index in range(count):
        images[index], labels[index], ignore[index] = _draw_example(seed, split, index, objects)

    logger.info(
        "shapes_generated",
        count=count,
        seed=seed,
        split=split,
        objects=objects,
        mean_intensity=float(images.mean()),
    )
    return DatasetBundle(
        inputs=images,
        labels=labels,
        ignore=ignore,
        metadata=DatasetMetadata(
            kind=DatasetKind.SHAPES,
            height=CANVAS,
            width=CANVAS,
            seed=seed,
            split=split,
            objects=objects,
        ),
    )


def generate_shapes_splits(
    seed: int,
    counts: dict[str, int] | None = None,
    objects: int = SPRITES_PER_IMAGE,
) -> dict[str, DatasetBundle]:
    """Train and test bundles (60,000 + 10,000 by default) from one seed."""
    counts = {**DEFAULT_SPLIT_COUNTS, **(counts or {})}
    return {
        name: generate_shapes(counts[name], seed, split=name, objects=objects) for name in ("train", "test")
    }
