"""Hot kernels: compiled when the extension is built, pure Python otherwise.

Set ``POI_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names the
implementation in use.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("POI_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

adaptive_dp = _impl.adaptive_dp
max_probe_dp = _impl.max_probe_dp
steiner_cost = _impl.steiner_cost

__all__ = ["BACKEND", "adaptive_dp", "max_probe_dp", "steiner_cost",
           "python_backend", "compiled_backend"]
