"""Select the compiled kernels when available, numpy otherwise.

Set ``HOMOSCOPE_BACKEND=python`` to force the numpy fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if os.environ.get("HOMOSCOPE_BACKEND", "").lower() not in ("python", "py", "numpy"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"


def get(name):
    """Return kernel module by name: ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
