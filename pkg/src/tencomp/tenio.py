"""Tensor container format and image import/export.

The ``.ten3`` container holds one third-order array:

========  ====================================================
bytes     field
========  ====================================================
0..3      magic ``TEN3``
4..7      u32 version, currently 1
8         u8 dtype code: 1 = f64, 2 = f32, 3 = u8
9..11     reserved, zero
12..23    u32 ``n1``, ``n2``, ``n3``
24..      payload, mode-1 index fastest (Fortran order)
========  ====================================================

All integers are little-endian.  Reading back a written file reproduces
the array bit-exactly for every dtype.  Masks are stored as u8 (0/1).

Images cross the boundary as PNG: loading rescales to [0, 1] by the bit
depth maximum, saving clips to [0, 1] and quantizes round-half-up to
8 bits.
"""

import os
import struct
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DimensionMismatch,
    InconsistentDims,
    UnreadableImage,
    WriteFailure,
)

_MAGIC = b"TEN3"
_VERSION = 1
_HEADER = struct.Struct("<4sIB3sIII")
_DTYPE_CODES = {1: np.dtype("<f8"), 2: np.dtype("<f4"), 3: np.dtype("u1")}
_CODE_FOR_KIND = {"f8": 1, "f4": 2, "u1": 3}


def write_ten3(path, array: np.ndarray, dtype=None) -> None:
    """Write ``array`` (shape ``(n1, n2, n3)``) as a .ten3 file.

    ``dtype`` defaults to the array's own dtype; bool arrays are stored
    as u8.
    """
    arr = np.asarray(array)
    if arr.ndim != 3:
        raise DimensionMismatch(f"can only store third-order tensors, got shape {arr.shape}")
    if dtype is None:
        dtype = np.uint8 if arr.dtype == bool else arr.dtype
    dtype = np.dtype(dtype)
    key = f"{dtype.kind}{dtype.itemsize}"
    if key not in _CODE_FOR_KIND:
        raise ValueError(f"unsupported dtype {dtype}; use f64, f32 or u8")
    code = _CODE_FOR_KIND[key]
    n1, n2, n3 = arr.shape
    header = _HEADER.pack(_MAGIC, _VERSION, code, b"\x00\x00\x00", n1, n2, n3)
    payload = np.ascontiguousarray(arr.ravel(order="F")).astype(_DTYPE_CODES[code]).tobytes()
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(payload)
    except OSError as exc:
        raise WriteFailure(f"cannot write {path}: {exc}") from exc


def read_ten3(path) -> np.ndarray:
    """Read a .ten3 file, returning the array in its stored dtype."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, code, reserved, n1, n2, n3 = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    if reserved != b"\x00\x00\x00":
        raise ValueError(f"{path}: reserved bytes not zero")
    if code not in _DTYPE_CODES:
        raise ValueError(f"{path}: unknown dtype code {code}")
    dtype = _DTYPE_CODES[code]
    expected = n1 * n2 * n3 * dtype.itemsize
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise ValueError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    flat = np.frombuffer(payload, dtype=dtype)
    return flat.reshape((n1, n2, n3), order="F").copy()


def write_mask(path, mask: np.ndarray) -> None:
    write_ten3(path, np.asarray(mask, dtype=np.uint8))


def read_mask(path) -> np.ndarray:
    arr = read_ten3(path)
    return arr != 0


def _image_to_array(img: Image.Image, force_gray: bool) -> np.ndarray:
    if force_gray and img.mode not in ("L", "I;16", "I"):
        img = img.convert("L")
    elif not force_gray and img.mode not in ("L", "I;16", "I", "RGB"):
        img = img.convert("RGB")
    arr = np.asarray(img)
    if arr.dtype == np.uint8:
        peak = 255.0
    elif arr.dtype in (np.uint16, np.int32):
        peak = 65535.0
    else:
        raise UnreadableImage(f"unsupported pixel type {arr.dtype}")
    return arr.astype(np.float64) / peak


def load_image_stack(path) -> np.ndarray:
    """Load a PNG (or a directory of them) as a [0, 1]-scaled tensor.

    A single file yields ``n3 = 3`` for color or ``n3 = 1`` for
    grayscale.  A directory is read as one grayscale frontal slice per
    file, sorted lexicographically; all files must share a shape.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".png")
        if not files:
            raise UnreadableImage(f"no .png files in {path}")
        slices = []
        for p in files:
            try:
                with Image.open(p) as img:
                    slices.append(_image_to_array(img, force_gray=True))
            except (UnidentifiedImageError, OSError) as exc:
                raise UnreadableImage(f"cannot read {p}: {exc}") from exc
            if slices[-1].shape != slices[0].shape:
                raise InconsistentDims(
                    f"{p} has shape {slices[-1].shape}, expected {slices[0].shape}"
                )
        return np.stack(slices, axis=2)
    try:
        with Image.open(path) as img:
            arr = _image_to_array(img, force_gray=False)
    except (UnidentifiedImageError, OSError) as exc:
        raise UnreadableImage(f"cannot read {path}: {exc}") from exc
    if arr.ndim == 2:
        return arr[:, :, None]
    return arr


def save_image_stack(t: np.ndarray, path) -> None:
    """Save a tensor as 8-bit PNG(s); inverse of ``load_image_stack``.

    ``n3 = 3`` saves one RGB file, ``n3 = 1`` one grayscale file; any
    other depth writes ``slice_###.png`` frames into ``path`` as a
    directory.  Values are clipped to [0, 1] and quantized round-half-up.
    """
    arr = np.asarray(t, dtype=np.float64)
    if arr.ndim != 3:
        raise DimensionMismatch(f"expected a third-order tensor, got shape {arr.shape}")
    q = np.floor(np.clip(arr, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    try:
        if arr.shape[2] == 3:
            Image.fromarray(q, mode="RGB").save(path)
        elif arr.shape[2] == 1:
            Image.fromarray(q[:, :, 0], mode="L").save(path)
        else:
            os.makedirs(path, exist_ok=True)
            for k in range(arr.shape[2]):
                Image.fromarray(q[:, :, k], mode="L").save(
                    Path(path) / f"slice_{k:03d}.png"
                )
    except OSError as exc:
        raise WriteFailure(f"cannot write {path}: {exc}") from exc
