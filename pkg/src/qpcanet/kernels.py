"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting the environment
variable ``QPCANET_PURE_PYTHON=1`` forces the NumPy fallback. Both backends
expose the same three functions with the same contracts.
"""
import os

from . import _kernels_py

if os.environ.get("QPCANET_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

BACKEND = "compiled" if _compiled is not None else "python"
_active = BACKENDS[BACKEND]

tridiagonal_ql = _active.tridiagonal_ql
correlate_bank = _active.correlate_bank
block_histograms = _active.block_histograms
