"""Procedural abdominal phantoms used as reference slices.

Each phantom is an elliptical soft-tissue body on an air background,
with two low-density lateral regions and a handful of randomly placed
elliptical inserts spanning soft-tissue contrasts. Ellipses are
rasterized with supersampled partial-volume coverage, so boundary
pixels blend like real CT voxels instead of flipping binary; this also
keeps the phantoms reconstructable by a band-limited system.

Layout, contrast, and insert count are drawn from a seeded generator,
so a (size, seed) pair always yields the same slice.
"""

from __future__ import annotations

import numpy as np

from .grids import Image

HU_BACKGROUND = -1000.0
HU_RANGE = (-1000.0, 400.0)

_SUPERSAMPLE = 4


def ellipse_coverage(
    shape: tuple[int, int],
    center: tuple[float, float],
    semi_axes: tuple[float, float],
    angle_rad: float = 0.0,
    supersample: int = _SUPERSAMPLE,
) -> np.ndarray:
    """Per-pixel area fraction covered by an ellipse, in [0, 1].

    Estimated on a ``supersample`` x ``supersample`` subgrid per pixel,
    evaluated only inside the ellipse's bounding box. ``semi_axes`` is
    (row axis, col axis) before rotation.
    """

    h, w = int(shape[0]), int(shape[1])
    ar, ac = semi_axes
    if ar <= 0 or ac <= 0:
        raise ValueError("semi-axes must be positive")
    if supersample < 1:
        raise ValueError("supersample must be at least 1")
    reach = max(ar, ac) + 1.0
    r0 = max(0, int(np.floor(center[0] - reach)))
    r1 = min(h, int(np.ceil(center[0] + reach)) + 1)
    c0 = max(0, int(np.floor(center[1] - reach)))
    c1 = min(w, int(np.ceil(center[1] + reach)) + 1)
    cov = np.zeros((h, w), dtype=np.float64)
    if r0 >= r1 or c0 >= c1:
        return cov
    ss = supersample
    sub_r = r0 + (np.arange((r1 - r0) * ss) + 0.5) / ss - 0.5 - center[0]
    sub_c = c0 + (np.arange((c1 - c0) * ss) + 0.5) / ss - 0.5 - center[1]
    cos_a = np.cos(angle_rad)
    sin_a = np.sin(angle_rad)
    u = sub_r[:, None] * cos_a + sub_c[None, :] * sin_a
    v = -sub_r[:, None] * sin_a + sub_c[None, :] * cos_a
    inside = (u / ar) ** 2 + (v / ac) ** 2 <= 1.0
    cov[r0:r1, c0:c1] = inside.reshape(r1 - r0, ss, c1 - c0, ss).mean(axis=(1, 3))
    return cov


def _paint(values: np.ndarray, coverage: np.ndarray, hu: float) -> None:
    values += coverage * (hu - values)


def make_ellipse_phantom(
    size: int,
    semi_axes: tuple[float, float] | None = None,
    hu: float = 40.0,
    pixel_spacing_mm: float = 1.0,
) -> Image:
    """A single uniform soft-tissue ellipse on air, partial-volume edges."""

    if size < 32:
        raise ValueError("phantom size must be at least 32 pixels")
    if semi_axes is None:
        semi_axes = (0.36 * size, 0.42 * size)
    values = np.full((size, size), HU_BACKGROUND, dtype=np.float64)
    center = ((size - 1) / 2.0, (size - 1) / 2.0)
    _paint(values, ellipse_coverage((size, size), center, semi_axes), hu)
    return Image(values=values, pixel_spacing_mm=pixel_spacing_mm)


def make_phantom(size: int, seed, pixel_spacing_mm: float = 1.0) -> Image:
    """Generate one abdominal phantom slice of ``size`` x ``size`` HU.

    The body ellipse is sized so that its support (pixels above the
    -500 HU body threshold) covers between roughly a third and half of
    the grid, leaving the whole body inside the inscribed
    reconstruction circle.
    """

    if size < 32:
        raise ValueError("phantom size must be at least 32 pixels")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    shape = (size, size)
    values = np.full(shape, HU_BACKGROUND, dtype=np.float64)
    center = ((size - 1) / 2.0, (size - 1) / 2.0)

    # body: wider than tall, like an axial abdomen
    semi_col = size * rng.uniform(0.38, 0.45)
    semi_row = size * rng.uniform(0.32, 0.40)
    body_hu = rng.uniform(30.0, 50.0)
    body_cov = ellipse_coverage(shape, center, (semi_row, semi_col))
    _paint(values, body_cov, body_hu)

    # interior soft-tissue inserts, clipped to the body
    num_inserts = int(rng.integers(4, 9))
    for _ in range(num_inserts):
        radial = np.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2.0 * np.pi)
        c = (
            center[0] + 0.72 * radial * semi_row * np.sin(phi),
            center[1] + 0.72 * radial * semi_col * np.cos(phi),
        )
        axes = (
            size * rng.uniform(0.03, 0.10),
            size * rng.uniform(0.03, 0.10),
        )
        hu = rng.uniform(-150.0, 300.0)
        tilt = rng.uniform(0.0, np.pi)
        cov = ellipse_coverage(shape, c, axes, tilt) * body_cov
        _paint(values, cov, hu)

    # two lateral low-density regions
    lung_hu = rng.uniform(-750.0, -650.0)
    for side in (-1.0, 1.0):
        c = (center[0] - 0.18 * semi_row, center[1] + side * 0.48 * semi_col)
        axes = (0.34 * semi_row, 0.24 * semi_col)
        tilt = side * rng.uniform(0.0, 0.25)
        cov = ellipse_coverage(shape, c, axes, tilt) * body_cov
        _paint(values, cov, lung_hu)

    np.clip(values, HU_RANGE[0], HU_RANGE[1], out=values)
    return Image(values=values, pixel_spacing_mm=pixel_spacing_mm)
