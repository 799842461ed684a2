"""Hot-loop kernels with a compiled backend and a numpy fallback.

The Cython build is used when importable; set ``FXCLUSTER_PURE_PYTHON=1``
to force the fallback. ``BACKEND`` names the active one.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("FXCLUSTER_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_active = compiled_backend or python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

js_pair = _active.js_pair
js_matrix = _active.js_matrix
agglomerate = _active.agglomerate

__all__ = ["BACKEND", "agglomerate", "compiled_backend", "js_matrix", "js_pair", "python_backend"]
