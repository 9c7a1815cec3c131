"""Self-contained 8-bit PNG and PPM writers."""

from __future__ import annotations

import struct
import zlib
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import VisualizationError

ImageFormat = Literal["png", "ppm"]

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
COLOR_GRAY = 0
COLOR_RGB = 2


def _chunk(kind: bytes, data: bytes) -> bytes:
    crc = zlib.crc32(data, zlib.crc32(kind))
    return struct.pack(">I", len(data)) + kind + data + struct.pack(">I", crc)


def _pixels(image: np.ndarray) -> np.ndarray:
    if image.dtype != np.uint8:
        raise VisualizationError(f"images must be uint8, got {image.dtype}")
    if image.ndim == 2 or (image.ndim == 3 and image.shape[2] == 3):
        if image.shape[0] == 0 or image.shape[1] == 0:
            raise VisualizationError("image has no pixels")
        return np.ascontiguousarray(image)
    raise VisualizationError(f"expected [H, W] or [H, W, 3], got shape {image.shape}")


def encode_png(image: np.ndarray) -> bytes:
    """
    Encode a grayscale [H, W] or RGB [H, W, 3] uint8 image.

    Rows use filter type 0; no interlacing, no ancillary chunks.
    """
    image = _pixels(image)
    height, width = image.shape[:2]
    color = COLOR_GRAY if image.ndim == 2 else COLOR_RGB
    rows = image.reshape(height, -1)
    raw = np.hstack([np.zeros((height, 1), dtype=np.uint8), rows]).tobytes()
    header = struct.pack(">IIBBBBB", width, height, 8, color, 0, 0, 0)
    return (
        PNG_SIGNATURE
        + _chunk(b"IHDR", header)
        + _chunk(b"IDAT", zlib.compress(raw, 9))
        + _chunk(b"IEND", b"")
    )


def encode_ppm(image: np.ndarray) -> bytes:
    """Binary PGM (P5) for grayscale, PPM (P6) for RGB."""
    image = _pixels(image)
    height, width = image.shape[:2]
    magic = "P5" if image.ndim == 2 else "P6"
    return f"{magic}\n{width} {height}\n255\n".encode("ascii") + image.tobytes()


def write_image(path: str | Path, image: np.ndarray, image_format: ImageFormat = "png") -> Path:
    """Write ``image``; the suffix of ``path`` is replaced to match the format."""
    path = Path(path)
    if image_format == "png":
        payload, suffix = encode_png(image), ".png"
    else:
        payload, suffix = encode_ppm(image), ".ppm" if image.ndim == 3 else ".pgm"
    path = path.with_suffix(suffix)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    return path
