"""Backend selection: `segmenter.backend` config key or env override.

The real foundation-model adapter is an optional plug-in loaded by dotted
path; its absence raises explicitly rather than silently substituting the
mock.
"""

from __future__ import annotations

import importlib
import os

from .base import BackendUnavailableError, SegmenterBackend
from .mock import MockSegmenter

BACKEND_ENV = "SAMIC_SEGMENTER_BACKEND"
EXTERNAL_PATH_ENV = "SAMIC_EXTERNAL_SEGMENTER"


def get_backend(name: str | None = None) -> SegmenterBackend:
    name = name or os.environ.get(BACKEND_ENV) or "mock"
    if name == "mock":
        return MockSegmenter()
    if name == "external":
        path = os.environ.get(EXTERNAL_PATH_ENV)
        if not path or ":" not in path:
            raise BackendUnavailableError(
                f"external backend requested but {EXTERNAL_PATH_ENV} is not set "
                "to 'module:factory'")
        module_name, attr = path.split(":", 1)
        try:
            module = importlib.import_module(module_name)
            factory = getattr(module, attr)
        except (ImportError, AttributeError) as exc:
            raise BackendUnavailableError(f"cannot load external backend {path!r}: {exc}")
        return factory()
    raise BackendUnavailableError(f"unknown segmenter backend {name!r}")
