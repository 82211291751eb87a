"""Embedding exporter for CT benchmark trees.

Walks a benchmark manifest, encodes every referenced slice (and the
default quality prompt strings) with a frozen encoder, and writes the
result as a CTDE embedding file. Communicates with the benchmark
generator exclusively through its file formats; nothing here imports
the generator package.
"""

from .ctde import save_embeddings
from .ctdi import FormatError, load_image
from .encoders import ModelError, available_models, resolve_model
from .export import ExportError, ExportJob, ExportResult, export
from .prompts import HIGH_PROMPTS, LOW_PROMPTS

__version__ = "0.1.0"

__all__ = [
    "ExportError",
    "ExportJob",
    "ExportResult",
    "FormatError",
    "HIGH_PROMPTS",
    "LOW_PROMPTS",
    "ModelError",
    "available_models",
    "export",
    "load_image",
    "resolve_model",
    "save_embeddings",
]
