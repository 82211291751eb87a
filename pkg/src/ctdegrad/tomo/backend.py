"""Projection kernel backend selection.

The compiled extension is used when importable; otherwise the NumPy
fallback. Setting CTDB_FORCE_NUMPY=1 forces the fallback regardless,
which is how the fallback is exercised in CI and benchmarked against
the extension.
"""

import importlib
import os

from . import _numpy_ops

try:
    _compiled = importlib.import_module("ctdegrad._projops")
except ImportError:  # extension not built on this install
    _compiled = None


def _want_numpy() -> bool:
    return os.environ.get("CTDB_FORCE_NUMPY", "") == "1"


if _compiled is not None and not _want_numpy():
    ACTIVE_BACKEND = "cython"
    forward_project = _compiled.forward_project
    back_project = _compiled.back_project
else:
    ACTIVE_BACKEND = "numpy"
    forward_project = _numpy_ops.forward_project
    back_project = _numpy_ops.back_project


def backend_name() -> str:
    """Name of the kernel backend selected at import time."""

    return ACTIVE_BACKEND


def available_backends() -> dict:
    """All importable backends, name -> (forward_project, back_project)."""

    table = {"numpy": (_numpy_ops.forward_project, _numpy_ops.back_project)}
    if _compiled is not None:
        table["cython"] = (_compiled.forward_project, _compiled.back_project)
    return table
