"""Kernel selection for the difference-bound matrix.

The compiled kernel is used when it was built; ``CPVERIFY_PURE=1`` forces the
pure-Python one (handy for benchmarking and for debugging).
"""
import os

from . import _dbm_py

KERNEL = "python"
DBM = _dbm_py.DBM
INF = _dbm_py.INF
LIMIT = _dbm_py.LIMIT

if os.environ.get("CPVERIFY_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _dbm_ext  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        DBM = _dbm_ext.DBM
        KERNEL = "compiled"

__all__ = ["DBM", "INF", "LIMIT", "KERNEL"]
