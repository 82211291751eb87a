"""Text-anchored semantic quality scoring of image embeddings.

Works on embeddings produced elsewhere (see the CTDE format in
:mod:`ctdegrad.fileio`): prompt embeddings for high- and low-quality
descriptions define a quality axis, image and patch embeddings are
projected onto it, and drift measures how far a degraded slice's
embedding moved from its reference's.

All scoring is done on unit-normalized vectors, so scores do not
depend on the raw embedding magnitude.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

# Default prompt sets describing the two ends of the quality axis: three
# high-quality descriptions and one low-quality description per
# degradation family.
DEFAULT_HIGH_PROMPTS = (
    "Axial abdominal CT slice with excellent diagnostic quality, sharp "
    "boundaries, clear organ detail, and no visible artifacts.",
    "Diagnostic abdominal CT with clear anatomical structures, low noise, "
    "high contrast, and no streak artifacts.",
    "High-quality CT image with sharp edges, clean appearance, and good "
    "visibility of abdominal organs.",
)
DEFAULT_LOW_PROMPTS = (
    "Abdominal CT slice with severe noise and grainy appearance that "
    "reduces visibility of anatomical structures.",
    "Abdominal CT slice with strong blur and significant loss of sharpness.",
    "Abdominal CT slice with strong streak artifacts and reduced "
    "diagnostic quality.",
    "Abdominal CT slice with sparse-view aliasing artifacts and distorted "
    "anatomical structures.",
    "Abdominal CT slice with strong metal artifacts causing bright streaks "
    "and severe image corruption.",
)

_MIN_NORM = 1e-12


def normalize(v: np.ndarray) -> np.ndarray:
    """Unit-normalize a vector; near-zero vectors are rejected."""

    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector must be finite")
    norm = float(np.linalg.norm(v))
    if norm < _MIN_NORM:
        raise ValueError("cannot normalize a (near-)zero vector")
    return v / norm


@dataclass(frozen=True)
class QualityAxis:
    """Unit direction from the low- toward the high-quality prototype."""

    direction: np.ndarray
    high_prototype_norm: float
    low_prototype_norm: float

    @property
    def dim(self) -> int:
        return int(self.direction.size)


def quality_axis(high_embs, low_embs) -> QualityAxis:
    """Build the quality axis from two prompt embedding sets.

    Each prompt embedding is unit-normalized, the two sets are averaged
    into prototypes, and the axis is the normalized prototype
    difference. Coinciding prototypes leave no direction and are
    rejected.
    """

    high = [normalize(v) for v in high_embs]
    low = [normalize(v) for v in low_embs]
    if not high or not low:
        raise ValueError("both prompt sets must be non-empty")
    if len({v.size for v in high + low}) != 1:
        raise ValueError("prompt embeddings must share one dimensionality")
    mu_high = np.mean(high, axis=0)
    mu_low = np.mean(low, axis=0)
    diff = mu_high - mu_low
    norm = float(np.linalg.norm(diff))
    if norm < 1e-9:
        raise ValueError(
            "high and low prototypes coincide; quality axis undefined"
        )
    return QualityAxis(
        direction=diff / norm,
        high_prototype_norm=float(np.linalg.norm(mu_high)),
        low_prototype_norm=float(np.linalg.norm(mu_low)),
    )


def global_score(embedding, axis: QualityAxis) -> float:
    """Projection of a (normalized) image embedding onto the axis.

    The embedding is normalized here, so the score is invariant to
    positive rescaling of the raw vector and bounded by [-1, 1].
    """

    z = normalize(embedding)
    if z.size != axis.dim:
        raise ValueError(f"embedding dim {z.size} != axis dim {axis.dim}")
    return float(z @ axis.direction)


def patch_scores(tokens, axis: QualityAxis) -> np.ndarray:
    """Per-patch projections; tokens are rows of a (num_patches, dim) array."""

    tokens = np.asarray(tokens, dtype=np.float64)
    if tokens.ndim != 2 or tokens.shape[0] < 1:
        raise ValueError("tokens must be a non-empty (num_patches, dim) array")
    return np.array([global_score(row, axis) for row in tokens])


def pool_scores(scores) -> dict:
    """Mean, max, and population-std pooling of patch scores."""

    scores = np.asarray(scores, dtype=np.float64).ravel()
    if scores.size < 1:
        raise ValueError("no scores to pool")
    return {
        "mean": float(scores.mean()),
        "max": float(scores.max()),
        "std": float(scores.std()),
    }


def embedding_drift(ref_emb, deg_emb) -> float:
    """Cosine drift 1 - cos(z_ref, z_deg) between unit-normalized pairs.

    Zero for identical directions, up to 2 for opposite ones.
    """

    a = normalize(ref_emb)
    b = normalize(deg_emb)
    if a.size != b.size:
        raise ValueError("embeddings must share one dimensionality")
    # identical and antipodal pairs are exact by definition; the dot
    # product would be off by rounding
    if np.array_equal(a, b):
        return 0.0
    if np.array_equal(a, -b):
        return 2.0
    cos = float(np.clip(a @ b, -1.0, 1.0))
    return 1.0 - cos


_NAME_RE = re.compile(
    r"^(img:(?P<img>.+)|patch:(?P<pimg>.+):(?P<pidx>\d+)"
    r"|prompt:(?P<pset>[HL]):(?P<promptidx>\d+)|meta:(?P<meta>.+))$"
)


class EmbeddingSet:
    """Indexed view over named CTDE entries.

    Understands the naming convention ``img:<id>``,
    ``patch:<id>:<index>``, ``prompt:H:<index>`` / ``prompt:L:<index>``,
    and ``meta:<text>``; anything else is rejected so that silent
    misspellings cannot drop samples from an analysis.
    """

    def __init__(self, entries):
        self._images: dict[str, np.ndarray] = {}
        self._patches: dict[str, list[tuple[int, np.ndarray]]] = {}
        self._prompts: dict[str, list[tuple[int, np.ndarray]]] = {"H": [], "L": []}
        self.meta: list[str] = []
        dims = set()
        for name, vec in entries:
            m = _NAME_RE.match(name)
            if m is None:
                raise ValueError(f"unrecognized embedding entry name {name!r}")
            vec = np.asarray(vec, dtype=np.float64)
            dims.add(vec.size)
            if m.group("img") is not None:
                self._images[m.group("img")] = vec
            elif m.group("pimg") is not None:
                self._patches.setdefault(m.group("pimg"), []).append(
                    (int(m.group("pidx")), vec)
                )
            elif m.group("pset") is not None:
                self._prompts[m.group("pset")].append(
                    (int(m.group("promptidx")), vec)
                )
            else:
                self.meta.append(m.group("meta"))
        if len(dims) > 1:
            raise ValueError(f"mixed embedding dimensions {sorted(dims)}")
        for key in self._patches:
            self._patches[key].sort()
        for key in self._prompts:
            self._prompts[key].sort()

    @property
    def image_ids(self) -> list[str]:
        return sorted(self._images)

    def image(self, sample_id: str) -> np.ndarray:
        if sample_id not in self._images:
            raise KeyError(f"no image embedding for {sample_id!r}")
        return self._images[sample_id]

    def has_image(self, sample_id: str) -> bool:
        return sample_id in self._images

    def patches(self, sample_id: str) -> np.ndarray:
        if sample_id not in self._patches:
            raise KeyError(f"no patch embeddings for {sample_id!r}")
        return np.stack([vec for _, vec in self._patches[sample_id]])

    def prompts(self, which: str) -> list[np.ndarray]:
        if which not in ("H", "L"):
            raise ValueError("prompt set must be 'H' or 'L'")
        return [vec for _, vec in self._prompts[which]]

    def default_axis(self) -> QualityAxis:
        high = self.prompts("H")
        low = self.prompts("L")
        if not high or not low:
            raise ValueError("embedding set has no prompt entries")
        return quality_axis(high, low)
