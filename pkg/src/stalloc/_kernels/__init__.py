"""Backend selection for the proposal kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module is. Set ``STALLOC_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

_requested = os.environ.get("STALLOC_BACKEND", "").strip().lower()
if _requested and _requested not in BACKENDS:
    raise ImportError(
        f"STALLOC_BACKEND={_requested!r} is not available; have {sorted(BACKENDS)}"
    )
BACKEND = _requested or ("cython" if "cython" in BACKENDS else "python")


def get(name: str | None = None):
    """Kernel module for ``name`` (default: the one selected at import)."""
    return BACKENDS[name or BACKEND]
