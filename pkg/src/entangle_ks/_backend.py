"""Kernel backend selection.

The compiled extension is used when importable; setting
``ENTANGLE_KS_BACKEND=python`` forces the numpy fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if os.environ.get("ENTANGLE_KS_BACKEND", "").lower() == "python" or compiled_kernels is None:
    kernels = _pykernels
    BACKEND = "python"
else:
    kernels = compiled_kernels
    BACKEND = "compiled"
