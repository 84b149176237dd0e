"""Satisfiability layers for constraint stores."""
from .dbm import KERNEL
from .engine import Inconsistent, Space
from .flatten import Problem, flatten
from .search import (
    SAT, UNKNOWN, UNSAT, BudgetExceeded, SolverConfig, Verdict, check, check_cheap,
    check_complete, counter_model, entails,
)


def propagate_store(items, bits: int = 8):
    """Domains of the store's program terms after root propagation.

    Returns ``None`` on failure, else a map from ``SVar`` or ``(SArr, i)`` to
    the sorted list of remaining values (small domains) or a ``(lo, hi)`` pair.
    """
    pb = flatten(list(items), bits)
    try:
        s = Space(pb)
        s.propagate()
    except Inconsistent:
        return None
    out = {}
    for key in list(pb.key_var) + list(pb._parent):
        v = pb.var_for_key(key)
        out[key] = list(s.values(v)) if s.size(v) <= 256 else (s.lo[v], s.hi[v])
    return out


__all__ = [
    "SAT", "UNSAT", "UNKNOWN", "BudgetExceeded", "SolverConfig", "Verdict", "check",
    "check_cheap", "check_complete", "counter_model", "entails", "flatten", "Problem",
    "Space", "Inconsistent", "propagate_store", "KERNEL",
]
