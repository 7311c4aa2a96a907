"""Integrator kernel backends.

The compiled Cython kernel is preferred when the extension built; the
pure-Python twin is the fallback. Set ``QUBESIM_PURE=1`` to force the
fallback (used by the backend benchmark and equivalence tests).
"""

import os

from . import pure

try:
    from . import _cyfast
except ImportError:
    _cyfast = None

if _cyfast is not None and not os.environ.get("QUBESIM_PURE"):
    active = _cyfast
else:
    active = pure

BACKEND = active.NAME


def available_backends():
    """Name -> kernel module for every importable backend."""
    backends = {"pure": pure}
    if _cyfast is not None:
        backends["cython"] = _cyfast
    return backends
