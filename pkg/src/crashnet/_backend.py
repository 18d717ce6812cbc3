"""Pick the compiled kernels when available; ``CRASHNET_PURE_PYTHON=1`` forces the numpy fallback."""
import os

from . import _pykernels as python

BACKEND = "python"
kernels = python
compiled = None

try:
    from . import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and os.environ.get("CRASHNET_PURE_PYTHON", "") not in ("1", "true", "yes"):
    kernels = compiled
    BACKEND = "compiled"


def available():
    """Name -> kernel module for every backend importable in this environment."""
    out = {"python": python}
    if compiled is not None:
        out["compiled"] = compiled
    return out
