"""Reader and writer for big-endian IDX files (MNIST digit images and labels)."""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

from packages.structured_logging import get_logger

from .errors import IdxFormatError, MissingMnistError

logger = get_logger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
GZIP_MAGIC = b"\x1f\x8b"

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def _read_bytes(path: Path) -> bytes:
    raw = path.read_bytes()
    return gzip.decompress(raw) if raw[:2] == GZIP_MAGIC else raw


def _unpack(fmt: str, data: bytes, offset: int) -> tuple[int, ...]:
    try:
        return struct.unpack_from(fmt, data, offset)
    except struct.error as e:
        raise IdxFormatError("header is truncated", offset) from e


def load_idx(path: str | Path) -> np.ndarray:
    """
    Load an IDX image or label file, optionally gzip-compressed.

    Args:
        path: IDX file.

    Returns:
        Images as [count, rows, cols] float64 scaled to [0, 1], or labels as
        [count] int64.

    Raises:
        IdxFormatError: Unknown magic, truncated payload or bad label values.
        OSError: The file cannot be read.
    """
    path = Path(path)
    data = _read_bytes(path)
    (magic,) = _unpack(">I", data, 0)

    if magic == IMAGES_MAGIC:
        count, rows, cols = _unpack(">III", data, 4)
        offset, shape = 16, (count, rows, cols)
    elif magic == LABELS_MAGIC:
        (count,) = _unpack(">I", data, 4)
        offset, shape = 8, (count,)
    else:
        raise IdxFormatError(f"unknown magic number 0x{magic:08x}", 0)

    expected = int(np.prod(shape))
    available = len(data) - offset
    if available < expected:
        raise IdxFormatError(
            f"payload truncated: expected {expected} bytes, found {available}", offset + available
        )
    values = np.frombuffer(data, dtype=np.uint8, count=expected, offset=offset).reshape(shape)

    logger.debug("idx_loaded", path=str(path), shape=list(shape))
    if magic == IMAGES_MAGIC:
        return values.astype(np.float64) / 255.0

    labels = values.astype(np.int64)
    bad = np.flatnonzero(labels > 9)
    if bad.size:
        raise IdxFormatError(f"label value {labels[bad[0]]} outside 0-9", offset + int(bad[0]))
    return labels


def write_idx(path: str | Path, values: np.ndarray, compress: bool = False) -> Path:
    """
    Write uint8 images ([count, rows, cols]) or labels ([count]) as IDX.

    Args:
        path: Output file.
        values: uint8 array of rank 1 or 3.
        compress: gzip the output.

    Returns:
        The written path.
    """
    values = np.asarray(values)
    if values.dtype != np.uint8:
        raise ValueError("IDX payloads are written as uint8")
    if values.ndim == 3:
        header = struct.pack(">IIII", IMAGES_MAGIC, *values.shape)
    elif values.ndim == 1:
        header = struct.pack(">II", LABELS_MAGIC, values.shape[0])
    else:
        raise ValueError(f"expected rank 1 or 3, got shape {values.shape}")

    payload = header + values.tobytes()
    path = Path(path)
    path.write_bytes(gzip.compress(payload, mtime=0) if compress else payload)
    return path


def find_mnist_files(mnist_dir: str | Path) -> dict[str, Path]:
    """
    Locate the four standard MNIST files, plain or with a .gz suffix.

    Raises:
        MissingMnistError: A file is missing.
    """
    mnist_dir = Path(mnist_dir)
    found: dict[str, Path] = {}
    for key, stem in MNIST_FILES.items():
        for candidate in (mnist_dir / stem, mnist_dir / f"{stem}.gz"):
            if candidate.is_file():
                found[key] = candidate
                break
        else:
            raise MissingMnistError(f"{stem}[.gz] not found in {mnist_dir}")
    return found
