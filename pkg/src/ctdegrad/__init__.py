"""CT degradation simulation and quality benchmarking toolkit.

Simulates physics-based CT degradations (noise, blur, streaks,
sparse-view aliasing, metal) at calibrated severity levels through a
forward-project / corrupt / reconstruct pipeline, generates benchmark
datasets with structured metadata, and analyzes them with
full-reference quality metrics, spectral descriptors, and semantic
embedding tools.
"""

__version__ = "0.1.0"

from .grids import (
    DENSE_NUM_VIEWS,
    AttenuationMap,
    Geometry,
    Image,
    PhysicsConstants,
    Sinogram,
    geometry_for_image,
    make_geometry,
    reconstruction_circle_mask,
)
from .tomo import (
    attenuation_to_hu,
    backend_name,
    fbp,
    hu_to_attenuation,
    radon,
)

__all__ = [
    "__version__",
    "AttenuationMap",
    "DENSE_NUM_VIEWS",
    "Geometry",
    "Image",
    "PhysicsConstants",
    "Sinogram",
    "attenuation_to_hu",
    "backend_name",
    "fbp",
    "geometry_for_image",
    "hu_to_attenuation",
    "make_geometry",
    "radon",
    "reconstruction_circle_mask",
]
