"""Hot kernels with a compiled backend and a pure-Python fallback.

The compiled module is used when it imports, unless ``EPRLDPC_PURE_PYTHON``
is set to a non-empty value other than ``0``. ``BACKEND`` names the choice.
"""

from __future__ import annotations

import os

from . import _pykernels

_force_py = os.environ.get("EPRLDPC_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels
        BACKEND = "python"

bp_run = _impl.bp_run
edge_girth = _impl.edge_girth

BACKENDS = {"python": _pykernels}
if BACKEND == "cython":
    BACKENDS["cython"] = _impl
else:
    try:
        from . import _ckernels

        BACKENDS["cython"] = _ckernels
    except ImportError:  # pragma: no cover
        pass

__all__ = ["BACKEND", "BACKENDS", "bp_run", "edge_girth"]
