"""Kernel backend selection.

The compiled extension is used when it imports and
``QMIDDLE_PURE_PYTHON`` is not set to a true value; otherwise the numpy
fallback is used. ``BACKEND`` names the active choice.
"""
import os

from . import _kernels_py as pure

compiled = None
if os.environ.get("QMIDDLE_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

kernels = compiled if compiled is not None else pure
BACKEND = "compiled" if compiled is not None else "python"
