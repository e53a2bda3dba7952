"""Kernel backend selection.

Imports the compiled kernels (``isohull._kernels_c``) when the extension
was built, otherwise the pure-Python reference (``isohull._kernels_py``).
Higher-level modules call kernels through this module's attributes, so the
active backend can also be swapped at runtime (used by the benchmark and
the backend-agreement tests).
"""

from __future__ import annotations

from . import _kernels_py

try:
    from . import _kernels_c as _default_impl

    HAVE_COMPILED = True
except ImportError:
    _default_impl = _kernels_py
    HAVE_COMPILED = False

_KERNEL_NAMES = (
    "sv2",
    "sv2_batch",
    "min_margin",
    "margin_batch",
    "sigma_at",
    "sigma_batch",
    "h_theta4",
    "h_theta_batch",
    "bisect_margin_e11",
    "bisect_line_root",
)

BACKEND = "compiled" if HAVE_COMPILED else "python"


def get_backend(name):
    """Return the kernel module for ``name`` ("compiled" or "python")."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernels are not available")
        from . import _kernels_c

        return _kernels_c
    raise ValueError(f"unknown backend {name!r}")


def use_backend(name):
    """Rebind this module's kernel attributes to the named backend."""
    global BACKEND
    impl = get_backend(name)
    for attr in _KERNEL_NAMES:
        globals()[attr] = getattr(impl, attr)
    BACKEND = name
    return impl


for _attr in _KERNEL_NAMES:
    globals()[_attr] = getattr(_default_impl, _attr)
del _attr
