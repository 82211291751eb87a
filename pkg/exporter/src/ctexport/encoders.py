"""Frozen encoders and the model registry.

The default encoder is fully offline and deterministic: it stands in
for a frozen vision-language model in environments that ship no model
weights. Images are windowed, resized, and passed through a fixed
Gaussian projection; text goes through signed token hashing. What the
export file relies on is exactly what these encoders guarantee:
same-input determinism, finite components, and unit norm.

Additional encoders (for example an actual CLIP checkpoint) can be
registered under new identifiers without touching the export flow.
"""

import hashlib
import re

import numpy as np

# display window applied before encoding, in HU
HU_WINDOW = (-1000.0, 400.0)

EMBED_DIM = 192
INPUT_GRID = 64
PATCH_GRID = 4

_PROJECTION_SEED = 338_203_481
_TOKEN_RE = re.compile(r"[a-z0-9]+")


class ModelError(RuntimeError):
    """Raised when a model identifier cannot be resolved or applied."""


def _resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Pixel-center-aligned bilinear resample to (out_h, out_w)."""

    h, w = img.shape
    rows = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    cols = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    r0 = np.clip(np.floor(rows).astype(np.int64), 0, h - 1)
    c0 = np.clip(np.floor(cols).astype(np.int64), 0, w - 1)
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    fr = np.clip(rows - r0, 0.0, 1.0)[:, None]
    fc = np.clip(cols - c0, 0.0, 1.0)[None, :]
    top = img[np.ix_(r0, c0)] * (1.0 - fc) + img[np.ix_(r0, c1)] * fc
    bottom = img[np.ix_(r1, c0)] * (1.0 - fc) + img[np.ix_(r1, c1)] * fc
    return top * (1.0 - fr) + bottom * fr


def _unit(vec: np.ndarray, what: str) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if not np.isfinite(norm) or norm < 1e-12:
        raise ModelError(f"degenerate {what} embedding (norm {norm})")
    return vec / norm


class OfflineEncoder:
    """Deterministic stand-in for a frozen image/text encoder."""

    model_id = "offline-v1"

    def __init__(self):
        rng = np.random.default_rng(_PROJECTION_SEED)
        # +1 for a constant bias channel so no input maps to the zero vector
        n_img = INPUT_GRID * INPUT_GRID + 1
        self._img_proj = rng.standard_normal((EMBED_DIM, n_img)) / np.sqrt(n_img)
        n_patch = (INPUT_GRID // PATCH_GRID) ** 2 + 1
        self._patch_proj = rng.standard_normal((EMBED_DIM, n_patch)) / np.sqrt(
            n_patch
        )

    def _prepare(self, hu: np.ndarray) -> np.ndarray:
        hu = np.asarray(hu, dtype=np.float64)
        if hu.ndim != 2 or hu.size == 0:
            raise ModelError(f"expected a 2-D slice, got shape {hu.shape}")
        if not np.all(np.isfinite(hu)):
            raise ModelError("slice contains non-finite HU values")
        lo, hi = HU_WINDOW
        windowed = (np.clip(hu, lo, hi) - lo) / (hi - lo)
        return _resize_bilinear(windowed, INPUT_GRID, INPUT_GRID)

    def encode_image(self, hu: np.ndarray) -> np.ndarray:
        """Global embedding of one slice, unit norm, shape (EMBED_DIM,)."""

        feat = np.append(self._prepare(hu).ravel(), 1.0)
        return _unit(self._img_proj @ feat, "image")

    def encode_patches(self, hu: np.ndarray) -> np.ndarray:
        """Row-major grid of patch tokens, unit rows, shape (16, EMBED_DIM)."""

        prepared = self._prepare(hu)
        side = INPUT_GRID // PATCH_GRID
        patches = (
            prepared.reshape(PATCH_GRID, side, PATCH_GRID, side)
            .transpose(0, 2, 1, 3)
            .reshape(PATCH_GRID * PATCH_GRID, side * side)
        )
        out = np.empty((patches.shape[0], EMBED_DIM))
        for i, patch in enumerate(patches):
            feat = np.append(patch, 1.0)
            out[i] = _unit(self._patch_proj @ feat, f"patch {i}")
        return out

    def encode_text(self, text: str) -> np.ndarray:
        """Signed hashed bag-of-words embedding, unit norm."""

        vec = np.zeros(EMBED_DIM)
        for token in _TOKEN_RE.findall(text.lower()):
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            index = int.from_bytes(digest[:4], "little") % EMBED_DIM
            vec[index] += 1.0 if digest[4] & 1 else -1.0
        return _unit(vec, f"text {text[:40]!r}")


_MODELS = {OfflineEncoder.model_id: OfflineEncoder}


def available_models() -> tuple[str, ...]:
    return tuple(sorted(_MODELS))


def resolve_model(model_id: str):
    """Instantiate the encoder registered under ``model_id``."""

    try:
        factory = _MODELS[model_id]
    except KeyError:
        known = ", ".join(available_models())
        raise ModelError(
            f"unknown model {model_id!r}; available: {known}"
        ) from None
    return factory()
