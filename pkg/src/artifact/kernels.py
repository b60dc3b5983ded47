"""Kernel backend selection.

The compiled extension is used when it imports; setting
``ARTIFACT_PURE_PYTHON=1`` forces the pure-Python versions.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("ARTIFACT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py

weak_order_table = _impl.weak_order_table
clause_truth = _impl.clause_truth
ll_horn_solve = _impl.ll_horn_solve
canonical_subsets = _impl.canonical_subsets
ll_horn_grid_scan = _impl.ll_horn_grid_scan
