"""Manifest-driven embedding export.

Reads a benchmark manifest, encodes every referenced slice plus the
default prompt strings, and writes one CTDE file. Entry names follow
the consumer's convention: ``img:<id>`` for global image embeddings,
``patch:<id>:<i>`` for optional patch tokens, ``prompt:H:<i>`` /
``prompt:L:<i>`` for the prompt sets, and ``meta:<text>`` records of
the encoding choices.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ctde import save_embeddings
from .ctdi import FormatError, load_image
from .encoders import EMBED_DIM, HU_WINDOW, PATCH_GRID, resolve_model
from .prompts import HIGH_PROMPTS, LOW_PROMPTS

MANIFEST_FORMAT = "ctdegrad-benchmark"


class ExportError(RuntimeError):
    """Raised when a manifest or one of its images cannot be exported."""


@dataclass(frozen=True)
class ExportJob:
    """One export request: which tree, which model, what to include."""

    manifest_path: Path
    out_path: Path
    model_id: str = "offline-v1"
    include_patches: bool = False

    def __post_init__(self):
        object.__setattr__(self, "manifest_path", Path(self.manifest_path))
        object.__setattr__(self, "out_path", Path(self.out_path))


@dataclass(frozen=True)
class ExportResult:
    out_path: Path
    num_images: int
    num_patch_tokens: int
    num_prompts: int


def _load_manifest(path: Path) -> dict:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ExportError(f"cannot read manifest: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ExportError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("format") != MANIFEST_FORMAT:
        raise ExportError(
            f"{path}: not a {MANIFEST_FORMAT} manifest"
        )
    records = payload.get("records")
    if not isinstance(records, list):
        raise ExportError(f"{path}: manifest has no record list")
    return payload


def _collect_images(manifest: dict) -> list[tuple[str, str]]:
    """Ordered (id, relative path) pairs: references first, then samples."""

    images: list[tuple[str, str]] = []
    seen: set[str] = set()
    for rec in manifest["records"]:
        rid = rec["reference_id"]
        if rid not in seen:
            seen.add(rid)
            images.append((rid, rec["reference_path"]))
    for rec in manifest["records"]:
        sid = rec["sample_id"]
        if sid in seen:
            raise ExportError(f"duplicate sample id {sid!r} in manifest")
        seen.add(sid)
        images.append((sid, rec["degraded_path"]))
    if not images:
        raise ExportError("manifest lists no images to export")
    return images


def export(job: ExportJob) -> ExportResult:
    """Encode everything the manifest references into one CTDE file."""

    encoder = resolve_model(job.model_id)
    manifest = _load_manifest(job.manifest_path)
    root = job.manifest_path.parent
    images = _collect_images(manifest)

    meta_vec = np.zeros(EMBED_DIM)
    meta_vec[0] = 1.0
    lo, hi = HU_WINDOW
    entries: list[tuple[str, np.ndarray]] = [
        (f"meta:model={encoder.model_id}", meta_vec),
        (f"meta:window={lo:g}:{hi:g}", meta_vec),
    ]
    if job.include_patches:
        entries.append(
            (
                f"meta:patches=windowed-resize-grid{PATCH_GRID}x{PATCH_GRID}",
                meta_vec,
            )
        )
    for i, text in enumerate(HIGH_PROMPTS):
        entries.append((f"prompt:H:{i}", encoder.encode_text(text)))
    for i, text in enumerate(LOW_PROMPTS):
        entries.append((f"prompt:L:{i}", encoder.encode_text(text)))

    num_patch_tokens = 0
    for image_id, rel_path in images:
        try:
            hu, _ = load_image(root / rel_path)
        except (OSError, FormatError) as exc:
            raise ExportError(f"cannot read image {rel_path}: {exc}") from exc
        entries.append((f"img:{image_id}", encoder.encode_image(hu)))
        if job.include_patches:
            for i, token in enumerate(encoder.encode_patches(hu)):
                entries.append((f"patch:{image_id}:{i}", token))
                num_patch_tokens += 1

    try:
        save_embeddings(job.out_path, entries)
    except OSError as exc:
        raise ExportError(f"cannot write {job.out_path}: {exc}") from exc
    return ExportResult(
        out_path=job.out_path,
        num_images=len(images),
        num_patch_tokens=num_patch_tokens,
        num_prompts=len(HIGH_PROMPTS) + len(LOW_PROMPTS),
    )
