"""Reader for CTDI files (single-slice HU grids).

Standalone implementation of the benchmark's image container so the
exporter can consume generated trees without importing the generator.
Layout: magic ``CTDI``, little-endian u32 version, u32 height, u32
width, f32 pixel spacing, then height x width f32 pixel values.
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"CTDI"
FORMAT_VERSION = 1
_MAX_SIDE = 1 << 20  # sanity bound on header dimensions


class FormatError(ValueError):
    """Raised when a file does not parse as a valid CTDI container."""


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise FormatError(f"truncated file while reading {what}")
    return buf


def load_image(path) -> tuple[np.ndarray, float]:
    """Read one slice; returns (float64 HU array, pixel spacing in mm)."""

    path = Path(path)
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected CTDI")
        (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
        if version != FORMAT_VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        h, w = struct.unpack("<II", _read_exact(fh, 8, "dimensions"))
        if not (1 <= h <= _MAX_SIDE and 1 <= w <= _MAX_SIDE):
            raise FormatError(f"{path}: implausible dimensions {h}x{w}")
        (spacing,) = struct.unpack("<f", _read_exact(fh, 4, "pixel spacing"))
        raw = _read_exact(fh, 4 * h * w, "pixel data")
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after pixel data")
    values = np.frombuffer(raw, dtype="<f4").reshape(h, w).astype(np.float64)
    return values, float(spacing)
