"""Writer for CTDE files (named embedding vectors).

Layout: magic ``CTDE``, little-endian u32 version, u32 entry count,
u32 dimension, then per entry a u16 name byte length, the UTF-8 name,
and ``dimension`` f32 components. One dimensionality per file, unique
names, finite values; the consumer enforces the same rules on read.
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"CTDE"
FORMAT_VERSION = 1


def save_embeddings(path, entries) -> None:
    """Write an ordered sequence of (name, vector) pairs."""

    entries = [
        (str(name), np.asarray(vec, dtype=np.float64)) for name, vec in entries
    ]
    if not entries:
        raise ValueError("cannot save an empty embedding set")
    dim = entries[0][1].size
    if dim < 1:
        raise ValueError("embedding dimension must be positive")
    seen = set()
    for name, vec in entries:
        if vec.ndim != 1 or vec.size != dim:
            raise ValueError(
                f"entry {name!r} has shape {vec.shape}, expected ({dim},)"
            )
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"entry {name!r} has non-finite components")
        if name in seen:
            raise ValueError(f"duplicate entry name {name!r}")
        seen.add(name)
        if len(name.encode("utf-8")) > 0xFFFF:
            raise ValueError(f"entry name too long: {name[:40]!r}...")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, len(entries), dim))
        for name, vec in entries:
            raw_name = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw_name)))
            fh.write(raw_name)
            fh.write(np.ascontiguousarray(vec, dtype="<f4").tobytes())
