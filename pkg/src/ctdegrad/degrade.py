"""Physics-based degradation operators with calibrated severity levels.

Five degradation families, each with four severity levels L0..L3, all
applied in the acquisition domain (sinogram or attenuation map) and
reconstructed with filtered backprojection:

* ``noise``    mixed Poisson-Gaussian photon statistics with a
               residual amplification factor gamma per level
* ``blur``     1-D Gaussian blur along the detector axis
* ``streak``   additive line-integral offsets on short random
               detector segments
* ``aliasing`` sparse-view acquisition (view subsets of the dense scan)
* ``metal``    a metal disk inserted into the attenuation map before
               projection

Mixtures chain several families in a fixed physical order; component
levels are sampled near a global severity and the mixture's severity is
their maximum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .grids import (
    DENSE_NUM_VIEWS,
    AttenuationMap,
    Geometry,
    Image,
    PhysicsConstants,
    Sinogram,
    geometry_for_image,
)
from .seeds import derive_seed
from .tomo import attenuation_to_hu, fbp, hu_to_attenuation, radon

SEVERITY_LEVELS = (0, 1, 2, 3)

# Per-level operator parameters.
NOISE_GAMMA = {0: 1.0, 1: 2.0, 2: 2.5, 3: 4.0}
BLUR_SIGMA_BINS = {0: 0.8, 1: 1.0, 2: 1.5, 3: 2.5}
STREAK_DELTA = {0: 0.25, 1: 0.5, 2: 1.0, 3: 2.0}
ALIAS_NUM_VIEWS = {0: 180, 1: 90, 2: 60, 3: 45}
METAL_RADIUS_PX = {0: 4, 1: 8, 2: 12, 3: 16}

# Photon model constants: unattenuated fluence, detector gain, additive
# electronic-noise standard deviation (counts), and the positive offset
# that keeps the post-detection log finite.
NOISE_I0 = 2.0e5
NOISE_ALPHA = 1.0
NOISE_SIGMA_E = 10.0
NOISE_DELTA = 0.1

# Streak mask structure: short contiguous runs of detector bins on
# single view rows.
STREAK_NUM_SEGMENTS = 6
STREAK_SEGMENT_BINS = 3

MU_METAL_MM = 0.2
BODY_SUPPORT_HU = -500.0

SINGLE_KINDS = ("noise", "blur", "streak", "aliasing", "metal")
MIXTURE_KINDS = ("b+n", "s+n", "m+n", "a+n", "m+b+n")

# Component chains in physical application order: metal alters the
# attenuation map before projection, aliasing selects the projection
# views, blur and streaks corrupt the dense-domain signal, and noise is
# always last (photon statistics act on whatever reaches the detector).
MIXTURE_COMPONENTS = {
    "b+n": ("blur", "noise"),
    "s+n": ("streak", "noise"),
    "m+n": ("metal", "noise"),
    "a+n": ("aliasing", "noise"),
    "m+b+n": ("metal", "blur", "noise"),
}


def _check_level(level: int) -> int:
    if level not in SEVERITY_LEVELS:
        raise ValueError(f"severity level must be one of {SEVERITY_LEVELS}, got {level}")
    return int(level)


def severity_params(kind: str, level: int) -> dict:
    """Operator parameters for a (family, level) pair, metadata-ready."""

    level = _check_level(level)
    if kind == "noise":
        return {
            "gamma": NOISE_GAMMA[level],
            "i0": NOISE_I0,
            "alpha": NOISE_ALPHA,
            "sigma_e": NOISE_SIGMA_E,
            "delta": NOISE_DELTA,
        }
    if kind == "blur":
        return {"sigma_bins": BLUR_SIGMA_BINS[level]}
    if kind == "streak":
        return {
            "delta_l": STREAK_DELTA[level],
            "num_segments": STREAK_NUM_SEGMENTS,
            "segment_bins": STREAK_SEGMENT_BINS,
        }
    if kind == "aliasing":
        return {"num_views": ALIAS_NUM_VIEWS[level]}
    if kind == "metal":
        return {"radius_px": METAL_RADIUS_PX[level], "mu_metal_mm": MU_METAL_MM}
    raise ValueError(f"unknown degradation kind {kind!r}")


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def apply_noise(
    sino: Sinogram,
    gamma: float,
    seed,
    *,
    i0: float = NOISE_I0,
    alpha: float = NOISE_ALPHA,
    sigma_e: float = NOISE_SIGMA_E,
    delta: float = NOISE_DELTA,
) -> Sinogram:
    """Mixed Poisson-Gaussian measurement noise on line integrals.

    Photon counts K ~ Poisson(alpha * i0 * exp(-s)) pick up additive
    Gaussian electronic noise, are floored at zero, and are converted
    back to line integrals through the offset log. The noisy residual
    is then amplified: out = s + gamma * (s_noisy - s), so gamma = 1 is
    the plain physical model.

    At gamma = 1 the added noise has mean near zero and a per-cell
    standard deviation close to the first-order prediction
    sqrt(exp(s)/ i0 + sigma_e^2 exp(2 s) / i0^2) for moderate s.
    """

    if gamma <= 0:
        raise ValueError("gamma must be positive")
    s = sino.values
    rng = _as_rng(seed)
    negatives = int(np.count_nonzero(s < 0.0))
    if negatives:
        warnings.warn(
            f"{negatives} negative line integrals clamped to 0 for the "
            "photon model",
            stacklevel=2,
        )
    expected = alpha * i0 * np.exp(-np.maximum(s, 0.0))
    counts = rng.poisson(expected).astype(np.float64)
    counts += rng.normal(0.0, sigma_e, size=counts.shape)
    counts = np.maximum(counts, 0.0)
    s_noisy = -np.log((counts + delta) / (alpha * i0))
    return Sinogram(geometry=sino.geometry, values=s + gamma * (s_noisy - s))


def apply_blur(sino: Sinogram, sigma_bins: float) -> Sinogram:
    """Gaussian blur along the detector axis, sigma in detector bins.

    View rows stay independent; each row keeps its total up to edge
    effects (edge bins are extended, and carry ~zero signal for any
    object inside the field of view).
    """

    if sigma_bins <= 0:
        raise ValueError("sigma_bins must be positive")
    blurred = ndimage.gaussian_filter1d(
        sino.values, sigma=sigma_bins, axis=1, mode="nearest"
    )
    return Sinogram(geometry=sino.geometry, values=blurred)


def make_streak_mask(
    num_views: int,
    num_detectors: int,
    seed,
    num_segments: int = STREAK_NUM_SEGMENTS,
    segment_bins: int = STREAK_SEGMENT_BINS,
) -> np.ndarray:
    """Boolean sinogram mask of short random detector segments.

    Each segment occupies ``segment_bins`` contiguous detector bins on
    one uniformly chosen view row. Segments may overlap.
    """

    if segment_bins > num_detectors:
        raise ValueError("segment wider than the detector row")
    rng = _as_rng(seed)
    mask = np.zeros((num_views, num_detectors), dtype=bool)
    for _ in range(num_segments):
        v = int(rng.integers(num_views))
        start = int(rng.integers(num_detectors - segment_bins + 1))
        mask[v, start : start + segment_bins] = True
    return mask


def apply_streaks(sino: Sinogram, delta_l: float, mask: np.ndarray) -> Sinogram:
    """Add a constant line-integral offset on the masked cells."""

    if mask.shape != sino.values.shape:
        raise ValueError(
            f"streak mask shape {mask.shape} does not match sinogram "
            f"{sino.values.shape}"
        )
    if mask.dtype != bool:
        raise ValueError("streak mask must be boolean")
    return Sinogram(
        geometry=sino.geometry, values=sino.values + delta_l * mask
    )


def subset_geometry(geom: Geometry, num_views: int) -> Geometry:
    """Geometry restricted to an evenly strided subset of views."""

    if num_views < 1 or geom.num_views % num_views != 0:
        raise ValueError(
            f"{num_views} views is not an exact divisor subset of the "
            f"dense scan's {geom.num_views}"
        )
    stride = geom.num_views // num_views
    return Geometry(
        angles_deg=geom.angles_deg[::stride].copy(),
        num_detectors=geom.num_detectors,
        detector_spacing_mm=geom.detector_spacing_mm,
        image_shape=geom.image_shape,
        pixel_spacing_mm=geom.pixel_spacing_mm,
        rotation_center=geom.rotation_center,
    )


def subsample_views(sino: Sinogram, num_views: int) -> Sinogram:
    """Keep an evenly strided subset of a dense sinogram's view rows."""

    geom = subset_geometry(sino.geometry, num_views)
    stride = sino.geometry.num_views // num_views
    return Sinogram(geometry=geom, values=sino.values[::stride].copy())


def disk_mask(
    shape: tuple[int, int], center: tuple[int, int], radius_px: float
) -> np.ndarray:
    """Inclusive-boundary disk mask in pixel coordinates."""

    if radius_px <= 0:
        raise ValueError("radius must be positive")
    cr, cc = center
    rows = np.arange(shape[0], dtype=np.float64)[:, None] - cr
    cols = np.arange(shape[1], dtype=np.float64)[None, :] - cc
    return rows * rows + cols * cols <= float(radius_px) ** 2


def place_metal_disk(
    img: Image, radius_px: float, seed, support_hu: float = BODY_SUPPORT_HU
) -> tuple[np.ndarray, tuple[int, int]]:
    """Sample a disk mask centered uniformly on the body support.

    Support is every pixel above ``support_hu``; an image with no
    support (all air) cannot host an implant and is rejected.
    """

    support = img.values > support_hu
    if not support.any():
        raise ValueError("image has no body support; cannot place a metal disk")
    rng = _as_rng(seed)
    flat = np.flatnonzero(support)
    pick = int(flat[int(rng.integers(flat.size))])
    center = (pick // img.width, pick % img.width)
    return disk_mask(img.shape, center, radius_px), center


def insert_metal(
    m: AttenuationMap, mask: np.ndarray, mu_metal_mm: float = MU_METAL_MM
) -> AttenuationMap:
    """Replace attenuation inside the mask with the metal coefficient."""

    if mask.shape != m.shape:
        raise ValueError(f"metal mask shape {mask.shape} does not match {m.shape}")
    if mu_metal_mm <= 0:
        raise ValueError("mu_metal_mm must be positive")
    values = np.where(mask, mu_metal_mm, m.values)
    return AttenuationMap(values=values, pixel_spacing_mm=m.pixel_spacing_mm)


def mask_bbox(mask: np.ndarray) -> tuple[int, int, int, int]:
    """Tight inclusive (row_min, col_min, row_max, col_max) of a mask."""

    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        raise ValueError("mask is empty")
    return (int(rows[0]), int(cols[0]), int(rows[-1]), int(cols[-1]))


def sample_component_levels(
    global_level: int, num_components: int, seed
) -> list[int]:
    """Component severities for a mixture at a global level.

    Each component draws uniformly from {global-1, global} clipped to
    the valid range, redrawn until at least one component sits at the
    global level, so the mixture's severity (the max) equals it.
    """

    global_level = _check_level(global_level)
    if num_components < 1:
        raise ValueError("num_components must be positive")
    rng = _as_rng(seed)
    candidates = (max(global_level - 1, 0), global_level)
    while True:
        levels = [int(candidates[int(b)]) for b in rng.integers(0, 2, num_components)]
        if global_level in levels:
            return levels


@dataclass
class DegradationRecord:
    """What was done to one reference slice, in application order."""

    components: list[dict]
    order: list[str]
    mixture_kind: str | None
    severity: int
    metal_bbox: tuple[int, int, int, int] | None
    seed: int
    prompt: str

    def to_metadata(self) -> dict:
        return {
            "components": [dict(c) for c in self.components],
            "order": list(self.order),
            "mixture_kind": self.mixture_kind,
            "severity": self.severity,
            "metal_bbox": list(self.metal_bbox) if self.metal_bbox else None,
            "seed": self.seed,
            "prompt": self.prompt,
        }


# Degradation phrasing for the text prompt attached to each sample.
_SEVERITY_ADJECTIVE = {0: "mild", 1: "moderate", 2: "strong", 3: "severe"}
_KIND_PHRASE = {
    "noise": "{adj} noise and grainy appearance",
    "blur": "{adj} blur and loss of sharpness",
    "streak": "{adj} streak artifacts",
    "aliasing": "{adj} sparse-view aliasing artifacts",
    "metal": "{adj} metal artifacts",
}


def build_prompt(components: list[dict]) -> str:
    """Deterministic natural-language description of a degraded sample."""

    phrases = [
        _KIND_PHRASE[c["kind"]].format(adj=_SEVERITY_ADJECTIVE[c["level"]])
        for c in components
    ]
    return "Abdominal CT slice with " + ", ".join(phrases) + "."


def _validate_chain(kinds: list[str]) -> None:
    if not kinds:
        raise ValueError("degradation chain is empty")
    if len(set(kinds)) != len(kinds):
        raise ValueError(f"duplicate degradation kinds in chain {kinds}")
    for kind in kinds:
        if kind not in SINGLE_KINDS:
            raise ValueError(f"unknown degradation kind {kind!r}")
    if "metal" in kinds and kinds.index("metal") != 0:
        raise ValueError("metal alters the attenuation map; it must come first")
    if "aliasing" in kinds:
        after = kinds.index("aliasing")
        if any(k in ("blur", "streak") for k in kinds[:after]):
            raise ValueError("aliasing selects the projection views; it must "
                             "precede sinogram-domain degradations")
    if "noise" in kinds and kinds.index("noise") != len(kinds) - 1:
        raise ValueError("noise models the detector and must be last")


def run_degradation(
    ref: Image,
    chain: list[tuple[str, int]],
    seed: int,
    *,
    mixture_kind: str | None = None,
    constants: PhysicsConstants = PhysicsConstants(),
    num_views: int = DENSE_NUM_VIEWS,
) -> tuple[Image, DegradationRecord]:
    """Degrade a reference slice through an ordered component chain.

    The chain is a list of (kind, level) pairs in application order;
    each component draws randomness from its own stream derived from
    ``seed``, its position, and its kind, so a chain is reproducible
    and a single-component chain matches the corresponding standalone
    degradation exactly.
    """

    kinds = [kind for kind, _ in chain]
    _validate_chain(kinds)
    components = []
    for kind, level in chain:
        components.append(
            {"kind": kind, "level": _check_level(level), "params": severity_params(kind, level)}
        )

    mu = hu_to_attenuation(ref, constants)
    metal_bbox = None
    geom = geometry_for_image(ref, num_views)

    by_kind = {c["kind"]: c for c in components}
    if "metal" in by_kind:
        comp = by_kind["metal"]
        rng = _as_rng(derive_seed(seed, kinds.index("metal"), "metal"))
        mask, _center = place_metal_disk(ref, comp["params"]["radius_px"], rng)
        mu = insert_metal(mu, mask, comp["params"]["mu_metal_mm"])
        metal_bbox = mask_bbox(mask)

    if "aliasing" in by_kind:
        geom = subset_geometry(geom, by_kind["aliasing"]["params"]["num_views"])
    sino = radon(mu, geom)

    for idx, comp in enumerate(components):
        kind = comp["kind"]
        if kind in ("metal", "aliasing"):
            continue
        if kind == "blur":
            sino = apply_blur(sino, comp["params"]["sigma_bins"])
        elif kind == "streak":
            rng = _as_rng(derive_seed(seed, idx, "streak"))
            mask = make_streak_mask(
                geom.num_views,
                geom.num_detectors,
                rng,
                comp["params"]["num_segments"],
                comp["params"]["segment_bins"],
            )
            sino = apply_streaks(sino, comp["params"]["delta_l"], mask)
        elif kind == "noise":
            rng = _as_rng(derive_seed(seed, idx, "noise"))
            sino = apply_noise(
                sino,
                comp["params"]["gamma"],
                rng,
                i0=comp["params"]["i0"],
                alpha=comp["params"]["alpha"],
                sigma_e=comp["params"]["sigma_e"],
                delta=comp["params"]["delta"],
            )

    degraded = attenuation_to_hu(fbp(sino), constants)
    record = DegradationRecord(
        components=components,
        order=kinds,
        mixture_kind=mixture_kind,
        severity=max(level for _, level in chain),
        metal_bbox=metal_bbox,
        seed=int(seed),
        prompt=build_prompt(components),
    )
    return degraded, record


def apply_single(
    ref: Image,
    kind: str,
    level: int,
    seed: int,
    *,
    constants: PhysicsConstants = PhysicsConstants(),
    num_views: int = DENSE_NUM_VIEWS,
) -> tuple[Image, DegradationRecord]:
    """One degradation family at one severity, full pipeline."""

    if kind not in SINGLE_KINDS:
        raise ValueError(f"unknown degradation kind {kind!r}")
    return run_degradation(
        ref, [(kind, level)], seed, constants=constants, num_views=num_views
    )


def compose_mixture(
    ref: Image,
    mixture_kind: str,
    global_level: int,
    seed: int,
    *,
    component_levels: list[int] | None = None,
    constants: PhysicsConstants = PhysicsConstants(),
    num_views: int = DENSE_NUM_VIEWS,
) -> tuple[Image, DegradationRecord]:
    """Apply one of the named mixtures at a global severity level.

    Component levels default to the sampling rule of
    :func:`sample_component_levels`; explicitly passed levels must have
    their maximum at the global level, since a mixture's severity is
    defined as the maximum of its components'.
    """

    if mixture_kind not in MIXTURE_COMPONENTS:
        raise ValueError(f"unknown mixture kind {mixture_kind!r}")
    global_level = _check_level(global_level)
    kinds = MIXTURE_COMPONENTS[mixture_kind]
    if component_levels is None:
        component_levels = sample_component_levels(
            global_level, len(kinds), derive_seed(seed, "component-levels")
        )
    else:
        component_levels = [_check_level(lv) for lv in component_levels]
        if len(component_levels) != len(kinds):
            raise ValueError(
                f"{mixture_kind} has {len(kinds)} components, got "
                f"{len(component_levels)} levels"
            )
        if max(component_levels) != global_level:
            raise ValueError(
                "mixture severity is the max of component levels; "
                f"max({component_levels}) != {global_level}"
            )
    chain = list(zip(kinds, component_levels))
    return run_degradation(
        ref,
        chain,
        seed,
        mixture_kind=mixture_kind,
        constants=constants,
        num_views=num_views,
    )
