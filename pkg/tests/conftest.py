"""Shared fixtures: synthetic digit images and a clean settings singleton."""

import numpy as np
import pytest

from packages.tagger_settings import reset_tagger_settings


def synthetic_digits(count: int = 40, size: int = 28) -> tuple[np.ndarray, np.ndarray]:
    """
    Stand-in for MNIST: digit d is a bright vertical bar whose column depends on d.

    Returns:
        (images [count, size, size] in [0, 1], labels [count])
    """
    labels = np.arange(count) % 10
    images = np.zeros((count, size, size))
    for i, digit in enumerate(labels):
        left = 4 + 2 * int(digit)
        images[i, 5 : size - 5, left : left + 4] = 0.9
        images[i, 5 : size - 5, left + 4] = 0.3
    return images, labels


@pytest.fixture
def mnist_arrays():
    return synthetic_digits()


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test starts from default TAGGER_* settings."""
    for name in ("TAGGER_THREADS", "TAGGER_LOG_LEVEL", "TAGGER_LOG_JSON", "TAGGER_LOG_FILE", "TAGGER_DEBUG_INVARIANTS"):
        monkeypatch.delenv(name, raising=False)
    reset_tagger_settings()
    yield
    reset_tagger_settings()
