"""Grid containers shared by the simulation and analysis modules.

All images are 2-D row-major arrays. Hounsfield-unit slices, linear
attenuation maps, and sinograms are kept as distinct types so that unit
errors (HU where mm^-1 is expected, and vice versa) fail loudly instead
of silently producing wrong reconstructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Linear attenuation of water at a typical effective diagnostic energy,
# in mm^-1. Used by the HU <-> attenuation conversion.
MU_WATER_MM = 0.0206

# HU of air; the lower bound of the physically meaningful HU range here.
HU_AIR = -1000.0


def _as_grid(values, what: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{what} must be a 2-D array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{what} must have at least one row and one column")
    return arr


@dataclass(frozen=True)
class PhysicsConstants:
    """Scalar constants of the acquisition physics."""

    mu_water_mm: float = MU_WATER_MM

    def __post_init__(self):
        if not (math.isfinite(self.mu_water_mm) and self.mu_water_mm > 0):
            raise ValueError("mu_water_mm must be finite and positive")


@dataclass(frozen=True)
class Image:
    """A 2-D CT slice in Hounsfield units."""

    values: np.ndarray
    pixel_spacing_mm: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "values", _as_grid(self.values, "Image.values"))
        if not (math.isfinite(self.pixel_spacing_mm) and self.pixel_spacing_mm > 0):
            raise ValueError("pixel_spacing_mm must be finite and positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AttenuationMap:
    """A 2-D map of linear attenuation coefficients in mm^-1."""

    values: np.ndarray
    pixel_spacing_mm: float = 1.0

    def __post_init__(self):
        object.__setattr__(
            self, "values", _as_grid(self.values, "AttenuationMap.values")
        )
        if not (math.isfinite(self.pixel_spacing_mm) and self.pixel_spacing_mm > 0):
            raise ValueError("pixel_spacing_mm must be finite and positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class Geometry:
    """Parallel-beam acquisition geometry tied to a reconstruction grid.

    Angles are in degrees, strictly increasing, within [0, 180). The
    detector array is centered on the rotation axis; detector bin j sits
    at signed offset (j - (num_detectors - 1) / 2) * detector_spacing_mm.
    The rotation center defaults to the image center in pixel
    coordinates, ((H - 1) / 2, (W - 1) / 2).
    """

    angles_deg: np.ndarray
    num_detectors: int
    detector_spacing_mm: float
    image_shape: tuple[int, int]
    pixel_spacing_mm: float = 1.0
    rotation_center: tuple[float, float] | None = None

    def __post_init__(self):
        angles = np.ascontiguousarray(self.angles_deg, dtype=np.float64)
        if angles.ndim != 1 or angles.size < 1:
            raise ValueError("angles_deg must be a non-empty 1-D array")
        if not np.all(np.isfinite(angles)):
            raise ValueError("angles_deg must be finite")
        if np.any(angles < 0.0) or np.any(angles >= 180.0):
            raise ValueError("angles_deg must lie in [0, 180)")
        if angles.size > 1 and np.any(np.diff(angles) <= 0.0):
            raise ValueError("angles_deg must be strictly increasing")
        object.__setattr__(self, "angles_deg", angles)
        if self.num_detectors < 1:
            raise ValueError("num_detectors must be positive")
        if not (
            math.isfinite(self.detector_spacing_mm) and self.detector_spacing_mm > 0
        ):
            raise ValueError("detector_spacing_mm must be finite and positive")
        h, w = self.image_shape
        if h < 1 or w < 1:
            raise ValueError("image_shape must be positive")
        object.__setattr__(self, "image_shape", (int(h), int(w)))
        if not (math.isfinite(self.pixel_spacing_mm) and self.pixel_spacing_mm > 0):
            raise ValueError("pixel_spacing_mm must be finite and positive")
        if self.rotation_center is None:
            object.__setattr__(
                self, "rotation_center", ((h - 1) / 2.0, (w - 1) / 2.0)
            )
        else:
            cr, cc = self.rotation_center
            if not (math.isfinite(cr) and math.isfinite(cc)):
                raise ValueError("rotation_center must be finite")
            object.__setattr__(self, "rotation_center", (float(cr), float(cc)))

    @property
    def num_views(self) -> int:
        return int(self.angles_deg.size)

    @property
    def angles_rad(self) -> np.ndarray:
        return np.deg2rad(self.angles_deg)

    def detector_coverage_mm(self) -> float:
        return self.num_detectors * self.detector_spacing_mm

    def image_diagonal_mm(self) -> float:
        h, w = self.image_shape
        return math.hypot(h, w) * self.pixel_spacing_mm


@dataclass(frozen=True)
class Sinogram:
    """Projection data, one row per view, one column per detector bin."""

    geometry: Geometry
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_grid(self.values, "Sinogram.values")
        expected = (self.geometry.num_views, self.geometry.num_detectors)
        if arr.shape != expected:
            raise ValueError(
                f"sinogram shape {arr.shape} does not match geometry {expected}"
            )
        object.__setattr__(self, "values", arr)

    @property
    def num_views(self) -> int:
        return self.geometry.num_views

    @property
    def num_detectors(self) -> int:
        return self.geometry.num_detectors


# View counts used by the dense scan and its sparse subsets. Each sparse
# count must divide the dense count so sparse scans are exact row subsets.
DENSE_NUM_VIEWS = 360
SPARSE_VIEW_COUNTS = (180, 90, 60, 45)


def make_geometry(
    image_shape: tuple[int, int],
    pixel_spacing_mm: float = 1.0,
    num_views: int = DENSE_NUM_VIEWS,
) -> Geometry:
    """Canonical scan geometry for a square-pixel image grid.

    Uses evenly spaced angles over [0, 180), a detector pitch equal to
    the pixel pitch, and enough detector bins to cover the grid
    diagonal. The benchmark's dense scans require num_views to be
    divisible by every sparse view count so that sparse-view scans are
    exact angle subsets; counts that break that are rejected.
    """

    h, w = int(image_shape[0]), int(image_shape[1])
    if num_views < 2:
        raise ValueError("num_views must be at least 2")
    for sparse in SPARSE_VIEW_COUNTS:
        if num_views % sparse != 0:
            raise ValueError(
                f"num_views={num_views} is not divisible by sparse view "
                f"count {sparse}; sparse scans would not be angle subsets"
            )
    # even count keeps detector bins aligned with pixel centers of
    # even-sized grids at cardinal angles
    num_det = int(math.ceil(math.sqrt(2.0) * max(h, w)))
    num_det += num_det % 2
    angles = np.arange(num_views, dtype=np.float64) * (180.0 / num_views)
    return Geometry(
        angles_deg=angles,
        num_detectors=num_det,
        detector_spacing_mm=pixel_spacing_mm,
        image_shape=(h, w),
        pixel_spacing_mm=pixel_spacing_mm,
    )


def geometry_for_image(img: Image, num_views: int = DENSE_NUM_VIEWS) -> Geometry:
    return make_geometry(img.shape, img.pixel_spacing_mm, num_views)


def reconstruction_circle_mask(
    shape: tuple[int, int], center: tuple[float, float] | None = None
) -> np.ndarray:
    """Boolean mask of the circle inscribed in the image grid.

    Reconstructions are only valid inside this circle; metric
    evaluation restricts to it.
    """

    h, w = int(shape[0]), int(shape[1])
    if center is None:
        center = ((h - 1) / 2.0, (w - 1) / 2.0)
    cr, cc = center
    radius = min(h, w) / 2.0
    rows = np.arange(h, dtype=np.float64)[:, None] - cr
    cols = np.arange(w, dtype=np.float64)[None, :] - cc
    return rows * rows + cols * cols <= radius * radius
