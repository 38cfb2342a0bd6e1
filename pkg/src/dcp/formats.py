"""Bit-exact asset serialization.

Binary layouts (all little-endian):

  DMAP  depth map: magic b"DMAP" (4) | version u8 = 1 | width u32 | height u32
        | width*height float32 row-major.  Total size 13 + 4*w*h bytes.
        Depth is scale-free relative depth, larger = farther.
  EMB1  embedding vector: magic b"EMB1" (4) | version u8 = 1 | dim u32
        | dim float32.  Total size 9 + 4*dim bytes.

PNG conventions:

  masks   8-bit single-channel PNG, 0 = background, 255 = foreground; mapped
          to {0, 1} on load, any sample in 1..254 is a load error.
  images  8-bit PNG, RGB or RGBA.

save_*/load_* pairs round-trip bit-exactly; loaders reject non-finite
payloads naming the offending row-major index.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    BadMagicError,
    EmptyGridError,
    FormatError,
    MaskValueError,
    NonFiniteValueError,
    TruncatedFileError,
    UnsupportedVersionError,
)
from .grid import ensure_image, ensure_mask

DMAP_MAGIC = b"DMAP"
EMB1_MAGIC = b"EMB1"
FORMAT_VERSION = 1

_DMAP_HEADER = struct.Struct("<4sBII")
_EMB1_HEADER = struct.Struct("<4sBI")


def _read_exact(path: str | Path, minimum: int) -> bytes:
    data = Path(path).read_bytes()
    if len(data) < minimum:
        raise TruncatedFileError(str(path), minimum, len(data))
    return data


def _check_finite(values: np.ndarray, path: str | Path) -> None:
    finite = np.isfinite(values)
    if not finite.all():
        raise NonFiniteValueError(str(path), int(np.flatnonzero(~finite)[0]))


def load_depth(path: str | Path) -> np.ndarray:
    """Load a DMAP file into a float32 (H, W) array."""
    data = _read_exact(path, _DMAP_HEADER.size)
    magic, version, width, height = _DMAP_HEADER.unpack_from(data)
    if magic != DMAP_MAGIC:
        raise BadMagicError(str(path), magic, DMAP_MAGIC)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(str(path), version)
    if width == 0 or height == 0:
        raise EmptyGridError(f"{path}: zero dimension {width}x{height}")
    expected = _DMAP_HEADER.size + 4 * width * height
    if len(data) != expected:
        raise TruncatedFileError(str(path), expected, len(data))
    values = np.frombuffer(data, dtype="<f4", count=width * height,
                           offset=_DMAP_HEADER.size)
    _check_finite(values, path)
    return values.reshape(height, width).astype(np.float32)


def save_depth(depth: np.ndarray, path: str | Path) -> None:
    """Write a float32 (H, W) array as a DMAP file (round-trip bit-exact)."""
    arr = np.asarray(depth)
    if arr.ndim != 2:
        raise FormatError(f"depth must be 2-D, got shape {arr.shape}")
    height, width = arr.shape
    if width == 0 or height == 0:
        raise EmptyGridError(f"cannot save empty grid {width}x{height}")
    arr = np.ascontiguousarray(arr, dtype="<f4")
    _check_finite(arr.ravel(), path)
    header = _DMAP_HEADER.pack(DMAP_MAGIC, FORMAT_VERSION, width, height)
    Path(path).write_bytes(header + arr.tobytes())


def load_embedding(path: str | Path) -> np.ndarray:
    """Load an EMB1 file into a float32 (dim,) vector."""
    data = _read_exact(path, _EMB1_HEADER.size)
    magic, version, dim = _EMB1_HEADER.unpack_from(data)
    if magic != EMB1_MAGIC:
        raise BadMagicError(str(path), magic, EMB1_MAGIC)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(str(path), version)
    if dim == 0:
        raise EmptyGridError(f"{path}: zero-dimension embedding")
    expected = _EMB1_HEADER.size + 4 * dim
    if len(data) != expected:
        raise TruncatedFileError(str(path), expected, len(data))
    values = np.frombuffer(data, dtype="<f4", count=dim, offset=_EMB1_HEADER.size)
    _check_finite(values, path)
    return values.astype(np.float32)


def save_embedding(vec: np.ndarray, path: str | Path) -> None:
    """Write a float32 (dim,) vector as an EMB1 file."""
    arr = np.asarray(vec)
    if arr.ndim != 1:
        raise FormatError(f"embedding must be 1-D, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyGridError("cannot save zero-dimension embedding")
    arr = np.ascontiguousarray(arr, dtype="<f4")
    _check_finite(arr, path)
    header = _EMB1_HEADER.pack(EMB1_MAGIC, FORMAT_VERSION, arr.shape[0])
    Path(path).write_bytes(header + arr.tobytes())


def load_mask(path: str | Path) -> np.ndarray:
    """Load a mask PNG; 0 -> 0, 255 -> 1, anything else is a format error."""
    with Image.open(path) as img:
        if img.mode != "L":
            raise FormatError(f"{path}: mask PNG must be single-channel, got {img.mode}")
        arr = np.asarray(img, dtype=np.uint8)
    offending = arr[(arr != 0) & (arr != 255)]
    if offending.size:
        raise MaskValueError(str(path), int(offending[0]))
    return (arr == 255).astype(np.uint8)


def save_mask(mask: np.ndarray, path: str | Path) -> None:
    """Write a {0, 1} mask as an 8-bit single-channel PNG (0 / 255)."""
    arr = ensure_mask(mask)
    Image.fromarray(arr * np.uint8(255), mode="L").save(path, format="PNG")


def load_image(path: str | Path) -> np.ndarray:
    """Load an RGB or RGBA PNG into a uint8 (H, W, 3|4) array."""
    with Image.open(path) as img:
        if img.mode not in ("RGB", "RGBA"):
            raise FormatError(f"{path}: image must be RGB or RGBA, got {img.mode}")
        return np.asarray(img, dtype=np.uint8).copy()


def save_image(image: np.ndarray, path: str | Path) -> None:
    """Write a uint8 (H, W, 3|4) array as a PNG."""
    arr = ensure_image(image)
    mode = "RGB" if arr.shape[2] == 3 else "RGBA"
    Image.fromarray(arr, mode=mode).save(path, format="PNG")
