"""Benchmark dataset generation and report assembly.

``generate`` renders reference phantoms, degrades each one under every
requested (setting, level) pair, and writes a self-describing output
tree:

    refs/                      reference slices (CTDI)
    degraded/<setting>/L<n>/   degraded slices (CTDI)
    meta/<setting>/L<n>/       per-sample metadata (JSON)
    reports/                   analysis output of ``report``
    manifest.json              index; always written last

``report`` reads a manifest, scores degraded slices against their
references inside the reconstruction circle, and emits severity
correlation tables (CSV + Markdown), optionally with embedding-drift
analysis from a CTDE file.

Everything is deterministic in (config, master seed): per-sample seeds
are derived from the master seed and the sample's identity, outputs
carry no timestamps, and JSON is written with sorted keys.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .degrade import (
    MIXTURE_KINDS,
    SEVERITY_LEVELS,
    SINGLE_KINDS,
    apply_single,
    compose_mixture,
)
from .fileio import load_embeddings, load_image, save_image
from .grids import reconstruction_circle_mask
from .iqa import (
    CorrelationReport,
    correlation_csv,
    psnr,
    report_markdown,
    severity_correlation_report,
    ssim,
    vif,
)
from .phantom import make_phantom
from .seeds import derive_seed
from .semantic import EmbeddingSet, embedding_drift, global_score
from .spectral import spectral_descriptor

SINGLE_SETTINGS = {
    "S1_noise": "noise",
    "S2_blur": "blur",
    "S3_streak": "streak",
    "S4_aliasing": "aliasing",
    "S5_metal": "metal",
}
MIXTURE_SETTINGS = {
    "M1_b+n": "b+n",
    "M2_s+n": "s+n",
    "M3_m+n": "m+n",
    "M4_a+n": "a+n",
    "M5_m+b+n": "m+b+n",
}
ALL_SETTINGS = tuple(SINGLE_SETTINGS) + tuple(MIXTURE_SETTINGS)

KNOWN_METRICS = ("psnr", "ssim", "vif")

TEST_FRACTION = 0.3


class ConfigError(ValueError):
    """Invalid generation or report configuration."""


def normalize_setting(name: str) -> str:
    name = str(name)
    if name in ALL_SETTINGS:
        return name
    matches = [s for s in ALL_SETTINGS if s.split("_", 1)[0] == name]
    if len(matches) == 1:
        return matches[0]
    raise ConfigError(f"unknown setting {name!r}; known: {', '.join(ALL_SETTINGS)}")


@dataclass(frozen=True)
class GenerationConfig:
    num_slices: int
    image_size: int = 512
    settings: tuple[str, ...] = ALL_SETTINGS
    levels: tuple[int, ...] = SEVERITY_LEVELS
    pixel_spacing_mm: float = 1.0

    def __post_init__(self):
        if self.num_slices < 1:
            raise ConfigError("num_slices must be at least 1")
        if self.image_size < 64:
            raise ConfigError("image_size must be at least 64")
        if self.pixel_spacing_mm <= 0:
            raise ConfigError("pixel_spacing_mm must be positive")
        settings = tuple(normalize_setting(s) for s in self.settings)
        if len(set(settings)) != len(settings):
            raise ConfigError("duplicate settings")
        if not settings:
            raise ConfigError("at least one setting required")
        object.__setattr__(self, "settings", settings)
        levels = tuple(int(lv) for lv in self.levels)
        if not levels or len(set(levels)) != len(levels):
            raise ConfigError("levels must be a non-empty set")
        if any(lv not in SEVERITY_LEVELS for lv in levels):
            raise ConfigError(f"levels must be within {SEVERITY_LEVELS}")
        object.__setattr__(self, "levels", tuple(sorted(levels)))

    @classmethod
    def from_json(cls, path) -> "GenerationConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {
            "num_slices",
            "image_size",
            "settings",
            "levels",
            "pixel_spacing_mm",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "num_slices" not in data:
            raise ConfigError("config needs num_slices")
        kwargs = dict(data)
        for key in ("settings", "levels"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


METADATA_SCHEMA = {
    "type": "object",
    "required": [
        "sample_id",
        "setting",
        "reference_path",
        "degraded_path",
        "components",
        "order",
        "mixture_kind",
        "severity",
        "metal_bbox",
        "seed",
        "generator_version",
        "prompt",
        "spectral_descriptor",
    ],
    "additionalProperties": False,
    "properties": {
        "sample_id": {"type": "string", "minLength": 1},
        "setting": {"enum": list(ALL_SETTINGS)},
        "reference_path": {"type": "string", "minLength": 1},
        "degraded_path": {"type": "string", "minLength": 1},
        "components": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["kind", "level", "params"],
                "additionalProperties": False,
                "properties": {
                    "kind": {"enum": list(SINGLE_KINDS)},
                    "level": {"type": "integer", "minimum": 0, "maximum": 3},
                    "params": {"type": "object"},
                },
            },
        },
        "order": {
            "type": "array",
            "minItems": 1,
            "items": {"enum": list(SINGLE_KINDS)},
        },
        "mixture_kind": {"enum": list(MIXTURE_KINDS) + [None]},
        "severity": {"type": "integer", "minimum": 0, "maximum": 3},
        "metal_bbox": {
            "type": ["array", "null"],
            "minItems": 4,
            "maxItems": 4,
            "items": {"type": "integer", "minimum": 0},
        },
        "seed": {"type": "integer", "minimum": 0},
        "generator_version": {"type": "string"},
        "prompt": {"type": "string", "minLength": 1},
        "spectral_descriptor": {
            "type": "array",
            "minItems": 17,
            "maxItems": 17,
            "items": {"type": "number"},
        },
    },
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": [
        "format",
        "generator_version",
        "master_seed",
        "config",
        "split",
        "records",
        "failures",
        "complete",
    ],
    "properties": {
        "format": {"const": "ctdegrad-benchmark"},
        "split": {
            "type": "object",
            "required": ["train", "test"],
            "properties": {
                "train": {"type": "array", "items": {"type": "string"}},
                "test": {"type": "array", "items": {"type": "string"}},
            },
        },
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "sample_id",
                    "reference_id",
                    "setting",
                    "severity",
                    "reference_path",
                    "degraded_path",
                    "metadata_path",
                ],
            },
        },
        "failures": {"type": "array"},
        "complete": {"type": "boolean"},
    },
}


def worker_count() -> int:
    """Parallel worker count; CTDB_THREADS caps it when set."""

    available = os.cpu_count() or 1
    cap = os.environ.get("CTDB_THREADS", "")
    if cap:
        try:
            requested = int(cap)
        except ValueError:
            raise ConfigError(f"CTDB_THREADS must be an integer, got {cap!r}")
        if requested < 1:
            raise ConfigError("CTDB_THREADS must be at least 1")
        return min(available, requested)
    return available


@dataclass
class GenerationResult:
    out_dir: Path
    manifest_path: Path
    num_samples: int
    failures: list[dict] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.failures


def _ref_id(index: int) -> str:
    return f"r{index:04d}"


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _generate_sample(out_dir, master_seed, ref_id, ref_img, setting, level):
    seed = derive_seed(master_seed, ref_id, setting, level)
    if setting in SINGLE_SETTINGS:
        degraded, record = apply_single(
            ref_img, SINGLE_SETTINGS[setting], level, seed
        )
    else:
        degraded, record = compose_mixture(
            ref_img, MIXTURE_SETTINGS[setting], level, seed
        )
    sample_id = f"{ref_id}_{setting}_L{level}"
    rel_degraded = f"degraded/{setting}/L{level}/{ref_id}.ctdi"
    rel_meta = f"meta/{setting}/L{level}/{ref_id}.json"
    rel_ref = f"refs/{ref_id}.ctdi"
    save_image(out_dir / rel_degraded, degraded)
    metadata = {
        "sample_id": sample_id,
        "setting": setting,
        "reference_path": rel_ref,
        "degraded_path": rel_degraded,
        "generator_version": __version__,
        "spectral_descriptor": spectral_descriptor(degraded).as_list(),
        **record.to_metadata(),
    }
    jsonschema.validate(metadata, METADATA_SCHEMA)
    _write_json(out_dir / rel_meta, metadata)
    return {
        "sample_id": sample_id,
        "reference_id": ref_id,
        "setting": setting,
        "severity": record.severity,
        "reference_path": rel_ref,
        "degraded_path": rel_degraded,
        "metadata_path": rel_meta,
    }


def generate(cfg: GenerationConfig, master_seed: int, out_dir) -> GenerationResult:
    """Generate the full benchmark tree under ``out_dir``."""

    if master_seed < 0:
        raise ConfigError("master seed must be nonnegative")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "refs").mkdir(exist_ok=True)
    (out_dir / "reports").mkdir(exist_ok=True)
    for setting in cfg.settings:
        for level in cfg.levels:
            (out_dir / "degraded" / setting / f"L{level}").mkdir(
                parents=True, exist_ok=True
            )
            (out_dir / "meta" / setting / f"L{level}").mkdir(
                parents=True, exist_ok=True
            )

    refs = {}
    for i in range(cfg.num_slices):
        ref_id = _ref_id(i)
        img = make_phantom(
            cfg.image_size,
            derive_seed(master_seed, "phantom", ref_id),
            cfg.pixel_spacing_mm,
        )
        save_image(out_dir / "refs" / f"{ref_id}.ctdi", img)
        refs[ref_id] = img

    tasks = [
        (ref_id, setting, level)
        for ref_id in sorted(refs)
        for setting in cfg.settings
        for level in cfg.levels
    ]

    records: dict[tuple, dict] = {}
    failures: list[dict] = []

    def run(task):
        ref_id, setting, level = task
        return _generate_sample(
            out_dir, master_seed, ref_id, refs[ref_id], setting, level
        )

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        for task, outcome in zip(tasks, pool.map(_trap(run), tasks)):
            if isinstance(outcome, Exception):
                failures.append(
                    {
                        "sample": f"{task[0]}_{task[1]}_L{task[2]}",
                        "error": f"{type(outcome).__name__}: {outcome}",
                    }
                )
            else:
                records[task] = outcome

    rng = np.random.default_rng(derive_seed(master_seed, "split"))
    ref_ids = sorted(refs)
    order = [ref_ids[i] for i in rng.permutation(len(ref_ids))]
    num_test = int(round(TEST_FRACTION * len(ref_ids)))
    test_ids = sorted(order[:num_test])
    train_ids = sorted(set(ref_ids) - set(test_ids))

    manifest = {
        "format": "ctdegrad-benchmark",
        "generator_version": __version__,
        "master_seed": int(master_seed),
        "config": {
            "num_slices": cfg.num_slices,
            "image_size": cfg.image_size,
            "settings": list(cfg.settings),
            "levels": list(cfg.levels),
            "pixel_spacing_mm": cfg.pixel_spacing_mm,
        },
        "split": {"train": train_ids, "test": test_ids},
        "records": [records[t] for t in tasks if t in records],
        "failures": failures,
        "complete": not failures,
    }
    jsonschema.validate(manifest, MANIFEST_SCHEMA)
    manifest_path = out_dir / "manifest.json"
    _write_json(manifest_path, manifest)
    return GenerationResult(
        out_dir=out_dir,
        manifest_path=manifest_path,
        num_samples=len(records),
        failures=failures,
    )


def _trap(fn):
    def wrapped(task):
        try:
            return fn(task)
        except Exception as exc:  # collected per-sample, run continues
            return exc

    return wrapped


@dataclass
class ReportResult:
    report: CorrelationReport
    csv_path: Path
    markdown_path: Path
    num_scored: int
    failures: list[dict] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.failures


def load_manifest(path) -> dict:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    try:
        jsonschema.validate(manifest, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"manifest {path} is invalid: {exc.message}") from exc
    return manifest


_METRIC_FNS = {"psnr": psnr, "ssim": ssim, "vif": vif}


def report(
    manifest_path,
    metrics=KNOWN_METRICS,
    embeddings_path=None,
    out_dir=None,
) -> ReportResult:
    """Score every manifest record and emit correlation tables.

    Metrics are evaluated inside the inscribed reconstruction circle.
    With an embeddings file, per-sample drift from the reference
    embedding joins the metric table, as does the semantic axis score
    when the file carries prompt entries. Samples that cannot be
    scored (missing files, missing embeddings) are reported and
    skipped; they fail the run's completeness, not the whole report.
    """

    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    base = manifest_path.parent
    metrics = tuple(metrics)
    for m in metrics:
        if m not in _METRIC_FNS:
            raise ConfigError(
                f"unknown metric {m!r}; known: {', '.join(KNOWN_METRICS)}"
            )

    embeddings = None
    axis = None
    if embeddings_path is not None:
        embeddings = EmbeddingSet(load_embeddings(embeddings_path))
        if embeddings.prompts("H") and embeddings.prompts("L"):
            axis = embeddings.default_axis()

    ref_cache: dict[str, np.ndarray] = {}
    mask_cache: dict[tuple, np.ndarray] = {}
    samples = []
    failures = []
    for rec in manifest["records"]:
        sample_id = rec["sample_id"]
        try:
            ref_path = rec["reference_path"]
            if ref_path not in ref_cache:
                ref_cache[ref_path] = load_image(base / ref_path).values
            ref = ref_cache[ref_path]
            deg = load_image(base / rec["degraded_path"]).values
            if ref.shape not in mask_cache:
                mask_cache[ref.shape] = reconstruction_circle_mask(ref.shape)
            mask = mask_cache[ref.shape]
            values = {m: _METRIC_FNS[m](ref, deg, mask) for m in metrics}
            if embeddings is not None:
                z_ref = embeddings.image(rec["reference_id"])
                z_deg = embeddings.image(sample_id)
                values["drift"] = embedding_drift(z_ref, z_deg)
                if axis is not None:
                    values["semantic"] = global_score(z_deg, axis)
            samples.append((rec["setting"], rec["severity"], values))
        except Exception as exc:
            failures.append(
                {"sample": sample_id, "error": f"{type(exc).__name__}: {exc}"}
            )

    corr = severity_correlation_report(samples)
    out_dir = Path(out_dir) if out_dir is not None else base / "reports"
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "correlation.csv"
    md_path = out_dir / "report.md"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(correlation_csv(corr))
    md = report_markdown(corr)
    if failures:
        md += "\n## Scoring failures\n\n"
        md += "\n".join(f"- {f['sample']}: {f['error']}" for f in failures)
        md += "\n"
    with open(md_path, "w", encoding="utf-8") as fh:
        fh.write(md)
    return ReportResult(
        report=corr,
        csv_path=csv_path,
        markdown_path=md_path,
        num_scored=len(samples),
        failures=failures,
    )
