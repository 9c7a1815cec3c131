"""TextureMNIST: textured digits stacked on a textured background."""

from __future__ import annotations

import math

import numpy as np

from packages.autodiff import Stream, make_rng
from packages.structured_logging import get_logger

from .errors import MissingMnistError
from .models import (
    NO_CLASS,
    DatasetBundle,
    DatasetKind,
    DatasetMetadata,
    Texture,
    TextureBank,
    split_stream,
)

logger = get_logger(__name__)

FREQUENCIES = (0.08, 0.12, 0.16, 0.20, 0.24)
ORIENTATIONS = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)
DIGIT_THRESHOLD = 0.5
DIGIT_SHIFTS = {1: ((0, 0),), 2: ((-2, -2), (2, 2))}

# Default 50k/10k/10k: train and validation from the MNIST training file
TRAIN_SPLIT = 50_000
DEFAULT_SPLIT_COUNTS = {"train": 50_000, "validation": 10_000, "test": 10_000}


def texture_bank() -> TextureBank:
    """20 gratings: 5 frequencies × 4 orientations."""
    return TextureBank(
        textures=tuple(Texture(f, theta) for f in FREQUENCIES for theta in ORIENTATIONS)
    )


def shift_mask(mask: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Translate a boolean mask by (rows, cols), dropping what leaves the frame."""
    height, width = mask.shape
    shifted = np.zeros_like(mask)
    src_r = slice(max(0, -rows), min(height, height - rows))
    dst_r = slice(max(0, rows), min(height, height + rows))
    src_c = slice(max(0, -cols), min(width, width - cols))
    dst_c = slice(max(0, cols), min(width, width + cols))
    shifted[dst_r, dst_c] = mask[src_r, src_c]
    return shifted


def _compose_example(
    seed: int,
    split: str | None,
    index: int,
    digits: int,
    images: np.ndarray,
    labels: np.ndarray,
    bank: TextureBank,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = make_rng(seed, Stream.TEXTURED_MNIST, split_stream(split), index)
    height, width = images.shape[1:]

    picks: list[int] = []
    while len(picks) < digits:
        candidate = int(rng.integers(len(images)))
        if all(labels[candidate] != labels[p] for p in picks):
            picks.append(candidate)

    texture_ids = rng.choice(len(bank), size=digits + 1, replace=False)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=digits + 1)

    canvas = bank.render(int(texture_ids[0]), float(phases[0]), height, width)
    segment = np.zeros((height, width), dtype=np.uint8)
    for instance, (pick, (dr, dc)) in enumerate(zip(picks, DIGIT_SHIFTS[digits], strict=True), start=1):
        mask = shift_mask(images[pick] > DIGIT_THRESHOLD, dr, dc)
        texture = bank.render(int(texture_ids[instance]), float(phases[instance]), height, width)
        canvas[mask] = texture[mask]
        segment[mask] = instance

    classes = np.full(2, NO_CLASS, dtype=np.uint8)
    classes[:digits] = [labels[p] for p in picks]
    return canvas.ravel(), segment.ravel(), classes


def generate_textured_mnist(
    count: int,
    digits: int,
    mnist_images: np.ndarray | None,
    mnist_labels: np.ndarray | None,
    seed: int,
    split: str | None = None,
) -> DatasetBundle:
    """
    Compose TextureMNIST1 (one digit) or TextureMNIST2 (two digits).

    The background and every digit get distinct bank textures with random
    phases. Digit regions are MNIST intensities above 0.5; in two-digit mode
    the first digit moves two pixels left and up, the second two pixels right
    and down, and the second occludes the first. The two digits always have
    different classes. Example i of a split draws from the stream
    ``(TEXTURED_MNIST, split, i)``.

    Args:
        count: Number of images.
        digits: 1 or 2.
        mnist_images: [M, 28, 28] intensities in [0, 1].
        mnist_labels: [M] digit classes.
        seed: Generator seed.
        split: None, "train", "validation" or "test".

    Returns:
        Bundle with [count, 784] inputs and class labels.

    Raises:
        MissingMnistError: No digit data supplied.
    """
    if digits not in DIGIT_SHIFTS:
        raise ValueError(f"digits must be 1 or 2, got {digits}")
    if count < 1:
        raise ValueError("count must be >= 1")
    split_stream(split)
    if mnist_images is None or mnist_labels is None or len(mnist_images) == 0:
        raise MissingMnistError("TextureMNIST needs MNIST images and labels")
    if len(mnist_images) != len(mnist_labels):
        raise ValueError("MNIST images and labels differ in count")
    if digits == 2 and len(np.unique(mnist_labels)) < 2:
        raise ValueError("two-digit composition needs at least two digit classes")

    bank = texture_bank()
    height, width = mnist_images.shape[1:]
    inputs = np.empty((count, height * width))
    segments = np.empty((count, height * width), dtype=np.uint8)
    classes = np.empty((count, 2), dtype=np.uint8)
    for index in range(count):
        inputs[index], segments[index], classes[index] = _compose_example(
            seed, split, index, digits, mnist_images, mnist_labels, bank
        )

    kind = DatasetKind.TMNIST1 if digits == 1 else DatasetKind.TMNIST2
    logger.info("textured_mnist_generated", kind=kind.value, count=count, seed=seed, split=split)
    return DatasetBundle(
        inputs=inputs,
        labels=segments,
        ignore=np.zeros_like(segments, dtype=bool),
        metadata=DatasetMetadata(
            kind=kind, height=height, width=width, seed=seed, split=split, objects=digits
        ),
        class_labels=classes,
    )


def generate_textured_mnist_splits(
    digits: int,
    train_images: np.ndarray,
    train_labels: np.ndarray,
    test_images: np.ndarray,
    test_labels: np.ndarray,
    seed: int,
    counts: dict[str, int] | None = None,
    train_split: int = TRAIN_SPLIT,
) -> dict[str, DatasetBundle]:
    """
    Train/validation/test bundles.

    Train draws digits from the first ``train_split`` (50,000) training images, validation
    from the rest of the training file and test from the test file. All
    splits share ``seed``; their example streams are keyed by split.
    """
    counts = {**DEFAULT_SPLIT_COUNTS, **(counts or {})}
    sources = {
        "train": (train_images[:train_split], train_labels[:train_split]),
        "validation": (train_images[train_split:], train_labels[train_split:]),
        "test": (test_images, test_labels),
    }
    return {
        name: generate_textured_mnist(counts[name], digits, images, labels, seed, split=name)
        for name, (images, labels) in sources.items()
    }
