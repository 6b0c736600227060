"""Kernel backend selection.

The compiled extension is used when importable. Setting the environment
variable ``DOSLB_PURE_PYTHON=1`` forces the reference implementation.
"""

import os

from . import _kernels_py

if os.environ.get("DOSLB_PURE_PYTHON") == "1":
    kernels = _kernels_py
    NAME = "python"
else:
    try:
        from . import _kernels as kernels
        NAME = "cython"
    except ImportError:
        kernels = _kernels_py
        NAME = "python"

BACKENDS = {"python": _kernels_py}
if NAME == "cython":
    BACKENDS["cython"] = kernels
else:
    try:
        from . import _kernels as _compiled
        BACKENDS["cython"] = _compiled
    except ImportError:
        pass
