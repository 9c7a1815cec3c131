"""
TAGD binary tensor container.

Layout (all integers little-endian):

    magic "TAGD" | version u32 = 1 | entry count u32
    per entry: name length u16 | name (ASCII) | dtype u8 (0 = u8, 1 = f64)
               | ndim u8 | dims u64[ndim] | raw row-major values
    metadata length u32 | metadata (UTF-8 JSON)
"""

from __future__ import annotations

import json
import struct
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np

from packages.structured_logging import get_logger

from .errors import ContainerFormatError, UnsupportedVersionError
from .models import DatasetBundle, DatasetMetadata

logger = get_logger(__name__)

MAGIC = b"TAGD"
VERSION = 1
DTYPE_CODES = {np.dtype(np.uint8): 0, np.dtype("<f8"): 1}
CODE_DTYPES = {0: np.dtype(np.uint8), 1: np.dtype("<f8")}


def _encode_array(name: str, array: np.ndarray) -> bytes:
    try:
        encoded_name = name.encode("ascii")
    except UnicodeEncodeError as e:
        raise ContainerFormatError(f"entry name {name!r} is not ASCII") from e
    if not encoded_name or len(encoded_name) > 0xFFFF:
        raise ContainerFormatError(f"entry name {name!r} must be 1-65535 bytes")

    if array.dtype == np.bool_:
        array = array.astype(np.uint8)
    elif array.dtype.kind == "f":
        array = array.astype("<f8")
    code = DTYPE_CODES.get(array.dtype)
    if code is None:
        raise ContainerFormatError(f"entry {name!r} has unsupported dtype {array.dtype}")
    if array.ndim > 0xFF:
        raise ContainerFormatError(f"entry {name!r} has too many dimensions")

    header = struct.pack("<H", len(encoded_name)) + encoded_name
    header += struct.pack("<BB", code, array.ndim)
    header += struct.pack(f"<{array.ndim}Q", *array.shape)
    return header + np.ascontiguousarray(array).tobytes()


def container_write(
    path: str | Path,
    tensors: Mapping[str, np.ndarray],
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    """
    Write named arrays and JSON metadata to a TAGD file.

    Booleans are stored as u8 and floating arrays as f64.

    Raises:
        ContainerFormatError: A name or dtype cannot be represented.
    """
    chunks = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    chunks.extend(_encode_array(name, np.asarray(array)) for name, array in tensors.items())
    meta = json.dumps(dict(metadata or {}), sort_keys=True, ensure_ascii=False).encode("utf-8")
    chunks.append(struct.pack("<I", len(meta)) + meta)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"".join(chunks))
    logger.debug("container_written", path=str(path), entries=len(tensors))
    return path


class _Cursor:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.data):
            raise ContainerFormatError(f"truncated container while reading {what} at byte {self.offset}")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple[Any, ...]:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def container_read(path: str | Path) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """
    Read a TAGD file.

    Returns:
        (arrays by name in file order, metadata)

    Raises:
        ContainerFormatError: Bad magic, truncation, unknown dtype or bad metadata.
        UnsupportedVersionError: Version other than 1.
    """
    path = Path(path)
    cursor = _Cursor(path.read_bytes())
    if cursor.take(4, "magic") != MAGIC:
        raise ContainerFormatError(f"{path} is not a TAGD container")
    (version,) = cursor.unpack("<I", "version")
    if version != VERSION:
        raise UnsupportedVersionError(version)
    (count,) = cursor.unpack("<I", "entry count")

    arrays: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = cursor.unpack("<H", "name length")
        try:
            name = cursor.take(name_len, "name").decode("ascii")
        except UnicodeDecodeError as e:
            raise ContainerFormatError("entry name is not ASCII") from e
        if name in arrays:
            raise ContainerFormatError(f"duplicate entry name {name!r}")
        code, ndim = cursor.unpack("<BB", "dtype")
        dtype = CODE_DTYPES.get(code)
        if dtype is None:
            raise ContainerFormatError(f"entry {name!r} has unknown dtype code {code}")
        dims = cursor.unpack(f"<{ndim}Q", "dims")
        size = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
        raw = cursor.take(size, f"values of {name!r}")
        arrays[name] = np.frombuffer(raw, dtype=dtype).reshape(dims).copy()

    (meta_len,) = cursor.unpack("<I", "metadata length")
    try:
        metadata = json.loads(cursor.take(meta_len, "metadata").decode("utf-8")) if meta_len else {}
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ContainerFormatError(f"metadata of {path} is not UTF-8 JSON") from e
    if not isinstance(metadata, dict):
        raise ContainerFormatError(f"metadata of {path} must be a JSON object")

    logger.debug("container_read", path=str(path), entries=len(arrays))
    return arrays, metadata


def save_bundle(path: str | Path, bundle: DatasetBundle) -> Path:
    """Write a dataset bundle as a TAGD container."""
    tensors: dict[str, np.ndarray] = {
        "inputs": bundle.inputs,
        "labels": bundle.labels,
        "ignore": bundle.ignore,
    }
    if bundle.class_labels is not None:
        tensors["class_labels"] = bundle.class_labels
    metadata = {"artifact": "dataset", **bundle.metadata.model_dump(mode="json")}
    return container_write(path, tensors, metadata)


def load_bundle(path: str | Path) -> DatasetBundle:
    """
    Read a dataset bundle written by ``save_bundle``.

    Raises:
        ContainerFormatError: The container is not a dataset or lacks entries.
    """
    arrays, metadata = container_read(path)
    if metadata.get("artifact") != "dataset":
        raise ContainerFormatError(f"{path} does not hold a dataset")
    try:
        meta = DatasetMetadata.model_validate({k: v for k, v in metadata.items() if k != "artifact"})
        return DatasetBundle(
            inputs=arrays["inputs"],
            labels=arrays["labels"],
            ignore=arrays["ignore"].astype(bool),
            metadata=meta,
            class_labels=arrays.get("class_labels"),
        )
    except KeyError as e:
        raise ContainerFormatError(f"dataset container lacks entry {e}") from e
    except ValueError as e:
        raise ContainerFormatError(f"dataset container {path} is inconsistent: {e}") from e
