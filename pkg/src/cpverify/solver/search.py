"""Layered satisfiability: a cheap propagation layer, then a complete solver."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..constraints import ConstraintStore, Model, holds, negate
from .engine import Inconsistent, Space, shave
from .flatten import Problem, flatten

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"
ENUM_LIMIT = 16   # domains at most this large are enumerated, larger ones bisected


class BudgetExceeded(Exception):
    """The complete solver ran out of search nodes or time."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


@dataclass(frozen=True)
class SolverConfig:
    bits: int = 8
    solvers: tuple = ("cheap", "complete")
    labeling: str = "min-domain"
    node_budget: int = 10 ** 7
    time_budget: Optional[float] = None
    shave: bool = True

    def __post_init__(self):
        if not 2 <= self.bits <= 31:
            raise ValueError(f"bit width must be in [2, 31], got {self.bits}")
        if not self.solvers or self.solvers[-1] != "complete":
            raise ValueError("the last solver must be the complete one")
        if self.labeling != "min-domain":
            raise ValueError(f"unknown labeling heuristic {self.labeling!r}")


@dataclass
class Verdict:
    status: str
    model: Optional[Model] = None
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == SAT

    @property
    def unsat(self) -> bool:
        return self.status == UNSAT

    def __repr__(self):
        return f"Verdict({self.status})"


def _items(store) -> list:
    return list(store.items) if isinstance(store, ConstraintStore) else list(store)


def check_cheap(store, cfg: SolverConfig = SolverConfig()) -> Verdict:
    """Propagate bounds and differences over the linear atoms only.

    Disjunctions, products, divisions, element reads and alldifferent are
    dropped, so the layer decides an abstraction implied by the store:
    it may answer Unsat or Unknown, never Sat.
    """
    pb = flatten(_items(store), cfg.bits)
    try:
        Space(pb, pb.cheap_prims()).propagate(cap=20000)
    except Inconsistent:
        return Verdict(UNSAT)
    return Verdict(UNKNOWN)


def _model(pb: Problem, s: Space) -> Model:
    m = Model()
    for key, v in pb.key_var.items():
        if not isinstance(key, tuple):
            m.vars[(key.name, key.version)] = s.lo[v]
    for (name, ver), arr in pb.arrays.items():
        cells = []
        for i in range(arr.length):
            v = pb.key_var.get(pb._find((arr, i)))
            cells.append(0 if v is None else s.lo[v])
        m.arrays[(name, ver)] = cells
    # scalars merged into another key still need a value of their own
    for key in pb._parent:
        if not isinstance(key, tuple):
            m.vars[(key.name, key.version)] = s.lo[pb.var_for_key(key)]
    return m


def _choose(s: Space):
    for p in s.props:
        if id(p) in s.dead or p.kind != "or":
            continue
        live = [alt for alt in p.alts if s.alt_status(alt) >= 0]
        return ("or", p, live)
    best, best_size = None, None
    for prefer_base in (True, False):
        for v in range(s.pb.nvars):
            if s.pb.base[v] != prefer_base or s.lo[v] == s.hi[v]:
                continue
            n = s.size(v)
            if best is None or n < best_size:
                best, best_size = v, n
        if best is not None:
            break
    if best is None:
        return None
    if best_size <= ENUM_LIMIT:
        return ("enum", best, list(s.values(best)))
    mid = (s.lo[best] + s.hi[best]) // 2
    return ("split", best, mid)


def _children(parent: Space, choice):
    kind = choice[0]
    if kind == "or":
        p, alts = choice[1], choice[2]
        for alt in alts:
            def make(alt=alt):
                c = parent.clone()
                c.dead.add(id(p))
                c.post_all(alt)
                return c
            yield make
    elif kind == "enum":
        v = choice[1]
        for x in choice[2]:
            def make(x=x):
                c = parent.clone()
                c.fix(v, x)
                return c
            yield make
    else:
        v, mid = choice[1], choice[2]

        def low():
            c = parent.clone()
            c.set_hi(v, mid)
            return c

        def high():
            c = parent.clone()
            c.set_lo(v, mid + 1)
            return c
        yield low
        yield high


def check_complete(store, cfg: SolverConfig = SolverConfig()) -> Verdict:
    """Decide satisfiability by propagation and depth-first search.

    A Sat verdict carries a model that was re-checked against every
    constraint of the store by plain evaluation.
    """
    items = _items(store)
    started = time.perf_counter()
    stats = {"nodes": 0, "failures": 0, "max_depth": 0, "propagations": 0}
    pb = flatten(items, cfg.bits)
    try:
        root = Space(pb, stats=stats)
        root.propagate()
        if cfg.shave:
            shave(root)
    except Inconsistent:
        stats["nodes"] = 1
        stats["failures"] = 1
        return Verdict(UNSAT, stats=stats)
    stack = [(iter([lambda: root]), 0)]
    while stack:
        gen, depth = stack[-1]
        make = next(gen, None)
        if make is None:
            stack.pop()
            continue
        stats["nodes"] += 1
        if stats["nodes"] > cfg.node_budget:
            raise BudgetExceeded(f"node budget of {cfg.node_budget} exhausted", stats)
        if cfg.time_budget is not None and time.perf_counter() - started > cfg.time_budget:
            raise BudgetExceeded(f"time budget of {cfg.time_budget}s exhausted", stats)
        if depth > stats["max_depth"]:
            stats["max_depth"] = depth
        try:
            s = make()
            s.propagate()
        except Inconsistent:
            stats["failures"] += 1
            continue
        choice = _choose(s)
        if choice is None:
            if not s.is_solution():
                stats["failures"] += 1
                continue
            m = _model(pb, s)
            if not all(holds(c, m) for c in items):
                raise AssertionError("solver produced a model that violates the store")
            return Verdict(SAT, m, stats)
        stack.append((_children(s, choice), depth + 1))
    return Verdict(UNSAT, stats=stats)


def check(store, cfg: SolverConfig = SolverConfig()) -> Verdict:
    """Run the configured layers in order; the last one always decides."""
    for name in cfg.solvers[:-1]:
        if name == "cheap" and check_cheap(store, cfg).unsat:
            return Verdict(UNSAT, stats={"layer": "cheap"})
    v = check_complete(store, cfg)
    v.stats["layer"] = "complete"
    return v


def entails(store, c, cfg: SolverConfig = SolverConfig()) -> bool:
    """True iff every model of ``store`` satisfies ``c``."""
    return check(list(_items(store)) + [negate(c)], cfg).unsat


def counter_model(store, c, cfg: SolverConfig = SolverConfig()) -> Optional[Model]:
    """A model of ``store`` violating ``c``, or None when ``c`` is entailed."""
    v = check(list(_items(store)) + [negate(c)], cfg)
    return v.model if v.sat else None

