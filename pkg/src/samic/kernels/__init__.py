"""Codec inner loops with a compiled core and a pure-Python fallback.

The compiled extension is preferred when it imported cleanly; callers can
force a backend with :func:`set_backend` (used by tests and the benchmark).
"""

from . import _heatcore_py

try:
    from . import _heatcore as _compiled
except ImportError:  # pragma: no cover - depends on the build environment
    _compiled = None

_active = _compiled if _compiled is not None else _heatcore_py

AVAILABLE_BACKENDS = ("python",) if _compiled is None else ("compiled", "python")


def backend_name():
    return "compiled" if _active is _compiled else "python"


def set_backend(name):
    """Select the kernel backend: 'compiled', 'python', or 'auto'."""
    global _active
    if name == "auto":
        _active = _compiled if _compiled is not None else _heatcore_py
    elif name == "python":
        _active = _heatcore_py
    elif name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel backend is not available")
        _active = _compiled
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    return backend_name()


def gaussian_sum(xs, ys, height, width, sigma):
    return _active.gaussian_sum(xs, ys, height, width, sigma)


def label_components(binary, connectivity):
    return _active.label_components(binary, connectivity)
