"""Binary file formats for images, sinograms, and embeddings.

Three little-endian container formats, each with a 4-byte magic and a
u32 version field:

``CTDI`` image
    magic, version, u32 height, u32 width, f32 pixel spacing (mm),
    then height*width f32 HU values, row-major.

``CTDS`` sinogram
    magic, version, u32 num_views, u32 num_detectors, f32 detector
    spacing (mm), num_views f32 angles in degrees, then the projection
    values row-major (one row per view).

``CTDE`` embeddings
    magic, version, u32 count, u32 dim, then per entry a u16 name
    length, the UTF-8 name bytes, and dim f32 components.

Values are stored as f32; in-memory arrays are float64, so a write
rounds to f32 once and a read of that file is bit-exact thereafter.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grids import Geometry, Image, Sinogram

MAGIC_IMAGE = b"CTDI"
MAGIC_SINOGRAM = b"CTDS"
MAGIC_EMBEDDINGS = b"CTDE"
FORMAT_VERSION = 1

_MAX_SIDE = 1 << 20  # sanity bound on header dimensions


class FormatError(ValueError):
    """Raised when a file does not conform to its declared format."""


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise FormatError(f"truncated file while reading {what}")
    return buf


def _check_header(fh, magic: bytes, path) -> None:
    got = _read_exact(fh, 4, "magic")
    if got != magic:
        raise FormatError(
            f"{path}: bad magic {got!r}, expected {magic.decode('ascii')}"
        )
    (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")


def _check_dim(n: int, what: str) -> int:
    if not (1 <= n <= _MAX_SIDE):
        raise FormatError(f"implausible {what}: {n}")
    return n


def save_image(path, img: Image) -> None:
    path = Path(path)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC_IMAGE)
        fh.write(struct.pack("<IIIf", FORMAT_VERSION, h, w, img.pixel_spacing_mm))
        fh.write(np.ascontiguousarray(img.values, dtype="<f4").tobytes())


def load_image(path) -> Image:
    path = Path(path)
    with open(path, "rb") as fh:
        _check_header(fh, MAGIC_IMAGE, path)
        h, w = struct.unpack("<II", _read_exact(fh, 8, "dimensions"))
        _check_dim(h, "height")
        _check_dim(w, "width")
        (spacing,) = struct.unpack("<f", _read_exact(fh, 4, "pixel spacing"))
        raw = _read_exact(fh, 4 * h * w, "pixel data")
        extra = fh.read(1)
    if extra:
        raise FormatError(f"{path}: trailing bytes after pixel data")
    values = np.frombuffer(raw, dtype="<f4").reshape(h, w).astype(np.float64)
    return Image(values=values, pixel_spacing_mm=float(spacing))


def save_sinogram(path, sino: Sinogram) -> None:
    path = Path(path)
    g = sino.geometry
    with open(path, "wb") as fh:
        fh.write(MAGIC_SINOGRAM)
        fh.write(
            struct.pack(
                "<IIIf",
                FORMAT_VERSION,
                g.num_views,
                g.num_detectors,
                g.detector_spacing_mm,
            )
        )
        fh.write(np.ascontiguousarray(g.angles_deg, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(sino.values, dtype="<f4").tobytes())


def load_sinogram(path) -> Sinogram:
    """Load a sinogram; the reconstruction grid is inferred.

    The file stores only acquisition fields. The grid is restored as
    the largest square with pixel pitch equal to the detector pitch
    whose diagonal the detector row covers, matching how canonical
    geometries size their detector row.
    """

    path = Path(path)
    with open(path, "rb") as fh:
        _check_header(fh, MAGIC_SINOGRAM, path)
        num_views, num_det = struct.unpack("<II", _read_exact(fh, 8, "dimensions"))
        _check_dim(num_views, "num_views")
        _check_dim(num_det, "num_detectors")
        (det_spacing,) = struct.unpack("<f", _read_exact(fh, 4, "detector spacing"))
        angles = np.frombuffer(
            _read_exact(fh, 4 * num_views, "angles"), dtype="<f4"
        ).astype(np.float64)
        raw = _read_exact(fh, 4 * num_views * num_det, "projection data")
        extra = fh.read(1)
    if extra:
        raise FormatError(f"{path}: trailing bytes after projection data")
    values = np.frombuffer(raw, dtype="<f4").reshape(num_views, num_det)
    side = max(1, int(num_det / np.sqrt(2.0)))
    geom = Geometry(
        angles_deg=angles,
        num_detectors=num_det,
        detector_spacing_mm=float(det_spacing),
        image_shape=(side, side),
        pixel_spacing_mm=float(det_spacing),
    )
    return Sinogram(geometry=geom, values=values.astype(np.float64))


def save_embeddings(path, entries) -> None:
    """Write named vectors as a CTDE file.

    ``entries`` is an ordered sequence of (name, vector) pairs. All
    vectors must share one dimensionality, and names must be unique.
    """

    entries = [(str(name), np.asarray(vec, dtype=np.float64)) for name, vec in entries]
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
        fh.write(MAGIC_EMBEDDINGS)
        fh.write(struct.pack("<III", FORMAT_VERSION, len(entries), dim))
        for name, vec in entries:
            raw_name = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw_name)))
            fh.write(raw_name)
            fh.write(np.ascontiguousarray(vec, dtype="<f4").tobytes())


def load_embeddings(path) -> list[tuple[str, np.ndarray]]:
    """Read a CTDE file back as an ordered list of (name, vector) pairs."""

    path = Path(path)
    with open(path, "rb") as fh:
        _check_header(fh, MAGIC_EMBEDDINGS, path)
        count, dim = struct.unpack("<II", _read_exact(fh, 8, "count/dim"))
        if count < 1:
            raise FormatError(f"{path}: empty embedding set")
        _check_dim(dim, "dim")
        entries: list[tuple[str, np.ndarray]] = []
        seen: set[str] = set()
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(fh, 2, "name length"))
            name = _read_exact(fh, name_len, "name").decode("utf-8")
            if name in seen:
                raise FormatError(f"{path}: duplicate entry name {name!r}")
            seen.add(name)
            vec = np.frombuffer(
                _read_exact(fh, 4 * dim, f"vector {name!r}"), dtype="<f4"
            ).astype(np.float64)
            entries.append((name, vec))
        extra = fh.read(1)
    if extra:
        raise FormatError(f"{path}: trailing bytes after last entry")
    return entries
