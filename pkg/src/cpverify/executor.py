"""Depth-first symbolic execution over constraint stores.

A configuration pairs the remaining instructions with a version map and a
store. Tests branch into the successors whose store stays satisfiable;
terminal configurations are checked against the postcondition. Every
feasibility question is asked in increasing order of cost: constant folding,
the configuration's cached model, the cheap layer, then the complete solver.
"""
from __future__ import annotations

import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from .ast import (
    ArrayAssign, Assert, Assign, BinOp, Block, Call, Enforce, If, Index, ProgramAst, Return,
    While,
)
from .constraints import (
    FALSE, TRUE, CAnd, CImplies, CRel, ConstraintStore, Model, SCell, SConst, SVar, Undefined,
    complement, eval_sexpr, fold_sexpr, holds, negate, simplify, split_conjuncts,
)
from .parser import array_length, contract_bindings, instantiate_contract, pretty_expr
from .renaming import VersionMap, bump, expand_quantifiers, rename_expr
from .solver import BudgetExceeded, SolverConfig, check_cheap, check_complete

RUNNING, TOP, BOTTOM = "running", "top", "bottom"

PARTIALLY_CORRECT = "PartiallyCorrect"
POSTCONDITION_VIOLATION = "PostconditionViolation"
ASSERTION_VIOLATION = "AssertionViolation"
CONTRACT_VIOLATION = "ContractViolation"
OVERFLOW_VIOLATION = "OverflowViolation"

RESULT = SVar("result", 0)


class ResourceError(Exception):
    """A search or depth budget ran out; carries the trace of the offending path."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)

    def __reduce__(self):
        return type(self), (str(self), self.trace)


@dataclass(frozen=True)
class ExploreOptions:
    bits: int = 8
    check_overflow: bool = False
    max_depth: int = 10_000
    node_budget: int = 10 ** 7
    midpath: str = "complete"   # "cheap": trust cheap-Unknown mid-path
    jobs: int = 1
    exhaustive: bool = False    # keep exploring after the first violation

    def __post_init__(self):
        if not 2 <= self.bits <= 31:
            raise ValueError(f"bit width must be in [2, 31], got {self.bits}")
        if self.midpath not in ("cheap", "complete"):
            raise ValueError(f"unknown mid-path check {self.midpath!r}")
        if self.jobs < 1 or self.max_depth < 1:
            raise ValueError("jobs and max_depth must be positive")

    def solver_config(self) -> SolverConfig:
        return SolverConfig(bits=self.bits, node_budget=self.node_budget)


@dataclass
class Violation:
    kind: str
    model: Model
    trace: tuple
    line: Optional[int]
    message: str


@dataclass
class Configuration:
    instrs: tuple
    sigma: VersionMap
    store: ConstraintStore
    trace: tuple = ()
    status: str = RUNNING
    known: dict = field(default_factory=dict)
    introduced: frozenset = frozenset()
    witness: Optional[Model] = None
    violation: Optional[Violation] = None

    def clone(self) -> "Configuration":
        return replace(self, store=self.store.clone(), known=dict(self.known))


@dataclass(frozen=True)
class PrunedPath:
    trace: tuple
    layer: str   # fold | domain | cheap | complete

    def text(self) -> str:
        return "<" + ",".join(self.trace) + ">"


@dataclass
class VerificationReport:
    program: str
    verdict: str
    model: Optional[Model] = None
    witness: Optional[dict] = None
    trace: tuple = ()
    line: Optional[int] = None
    message: str = ""
    feasible_paths: int = 0
    pruned: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    elapsed: float = 0.0
    kinds: frozenset = frozenset()   # every violation kind met (all of them when exhaustive)

    @property
    def pruned_paths(self) -> int:
        return len(self.pruned)

    @property
    def ok(self) -> bool:
        return self.verdict == PARTIALLY_CORRECT


def _key(t):
    if isinstance(t, SVar):
        return t
    if isinstance(t, SCell) and isinstance(t.index, SConst):
        return (t.array, t.index.value)
    return None


def _holds(c, m: Optional[Model]) -> bool:
    if m is None:
        return False
    try:
        return holds(c, m)
    except KeyError:
        return False


def _binops(e):
    """Arithmetic subterms of ``e`` in evaluation order."""
    if isinstance(e, BinOp):
        yield from _binops(e.left)
        yield from _binops(e.right)
        yield e
    elif isinstance(e, Index):
        yield from _binops(e.index)
    elif isinstance(e, Call):
        for a in e.args:
            yield from _binops(a)


class Explorer:
    def __init__(self, ast: ProgramAst, opts: ExploreOptions = ExploreOptions()):
        self.ast = ast
        self.opts = opts
        self.scfg = opts.solver_config()
        self.kmin = -(1 << (opts.bits - 1))
        self.kmax = (1 << (opts.bits - 1)) - 1
        self.feasible_paths = 0
        self.pruned: list = []
        self.kinds: set = set()
        self.stats = {"steps": 0, "witness_hits": 0, "cheap_calls": 0, "cheap_unsat": 0,
                      "complete_calls": 0, "complete_unsat": 0, "search_nodes": 0}

    # -- solver access -----------------------------------------------------------

    def _complete(self, items, trace):
        self.stats["complete_calls"] += 1
        try:
            v = check_complete(items, self.scfg)
        except BudgetExceeded as exc:
            raise ResourceError(f"solver budget exhausted: {exc}", trace) from None
        self.stats["search_nodes"] += v.stats.get("nodes", 0)
        if v.unsat:
            self.stats["complete_unsat"] += 1
        return v

    def _cheap_unsat(self, items) -> bool:
        self.stats["cheap_calls"] += 1
        if check_cheap(items, self.scfg).unsat:
            self.stats["cheap_unsat"] += 1
            return True
        return False

    def feasible(self, cfg: Configuration, extra, trace, final=False):
        """``(ok, model, layer)`` for the store of ``cfg`` extended by ``extra``."""
        w = cfg.witness
        if w is not None and all(_holds(c, w) for c in extra):
            self.stats["witness_hits"] += 1
            return True, w, "witness"
        items = cfg.store.items + tuple(extra)
        if self._cheap_unsat(items):
            return False, None, "cheap"
        if self.opts.midpath == "cheap" and not final:
            return True, None, "cheap"
        v = self._complete(items, trace)
        if v.unsat:
            return False, None, "complete"
        return True, v.model, "complete"

    def counter(self, cfg: Configuration, neg, trace) -> Optional[Model]:
        """A model of the store satisfying ``neg``, or None."""
        if neg == FALSE:
            return None
        if _holds(neg, cfg.witness):
            self.stats["witness_hits"] += 1
            return cfg.witness
        items = cfg.store.items + (neg,)
        if self._cheap_unsat(items):
            return None
        v = self._complete(items, trace)
        return v.model if v.sat else None

    # -- store updates -----------------------------------------------------------

    def post(self, cfg: Configuration, c) -> bool:
        """Fold ``c`` and add it to the store; False if it folds to false."""
        s = simplify(c, cfg.known)
        if s == FALSE:
            return False
        for part in split_conjuncts(s):
            if isinstance(part, CRel) and part.op == "==":
                for a, b in ((part.left, part.right), (part.right, part.left)):
                    k = _key(a)
                    if k is not None and isinstance(b, SConst):
                        cfg.known[k] = b.value
            cfg.store.post(part)
        return True

    def term(self, cfg: Configuration, e):
        return fold_sexpr(rename_expr(cfg.sigma, e), cfg.known)

    def _line(self, node) -> Optional[int]:
        return node.pos.line - self.ast.header_line + 1 if node.pos else None

    def _prune(self, trace, layer):
        self.pruned.append(PrunedPath(tuple(trace), layer))

    def _extend_witness(self, cfg: Configuration, assign: dict):
        """Carry the cached model over an assignment, or drop it."""
        w = cfg.witness
        if w is None:
            return
        w = w.copy()
        try:
            for key, value in assign.items():
                if isinstance(key, SVar):
                    val = eval_sexpr(value, cfg.witness)
                    if not self.kmin <= val <= self.kmax:
                        raise Undefined()
                    w.vars[(key.name, key.version)] = val
                else:
                    old, new, idx, value = value
                    cells = list(cfg.witness.cells(old))
                    i = eval_sexpr(idx, cfg.witness)
                    val = eval_sexpr(value, cfg.witness)
                    if not 0 <= i < len(cells) or not self.kmin <= val <= self.kmax:
                        raise Undefined()
                    cells[i] = val
                    w.arrays[(new.name, new.version)] = cells
        except (KeyError, Undefined):
            w = None
        cfg.witness = w

    # -- configurations --------------------------------------------------------

    def initial(self) -> Optional[Configuration]:
        ast = self.ast
        sigma = VersionMap.bottom([p.name for p in ast.scalars],
                                  {p.name: array_length(ast, p.name) for p in ast.arrays})
        cfg = Configuration(tuple(ast.body), sigma, ConstraintStore())
        if not self.post(cfg, expand_quantifiers(ast.precondition, sigma)):
            return None
        return cfg

    def _assign_target(self, cfg: Configuration, node: Assign):
        if node.declares and node.target not in cfg.introduced and node.target not in cfg.sigma:
            return cfg.sigma.with_scalar(node.target), cfg.introduced | {node.target}
        return bump(cfg.sigma, node.target), cfg.introduced

    def _overflow(self, cfg: Configuration, exprs, node):
        """Range checks of the arithmetic in ``exprs``: ``(bottoms, continuation)``."""
        out = []
        if not self.opts.check_overflow:
            return out, cfg
        for e in exprs:
            for sub in _binops(e):
                t = self.term(cfg, sub)
                rng = CAnd((CRel(">=", t, SConst(self.kmin)), CRel("<=", t, SConst(self.kmax))))
                neg = simplify(negate(rng), cfg.known)
                m = self.counter(cfg, neg, cfg.trace)
                if m is not None:
                    v = Violation(OVERFLOW_VIOLATION, m, cfg.trace, self._line(node),
                                  f"value of {pretty_expr(sub)} may not fit in "
                                  f"{self.opts.bits} bits")
                    bots, cfg = self._violation(cfg, v, rng)
                    out += bots
                    if cfg is None:
                        return out, None
        return out, cfg

    def _violation(self, cfg: Configuration, v: Violation, guard):
        """Bottom successor for ``v``; exhaustively, also the path assuming ``guard``."""
        out = self._bottom(cfg, v)
        if not self.opts.exhaustive:
            return out, None
        return out, self._assume(cfg, guard)

    def _assume(self, cfg: Configuration, c) -> Optional[Configuration]:
        s = simplify(c, cfg.known)
        if s == FALSE:
            self._prune(cfg.trace, "fold")
            return None
        ok, model, layer = self.feasible(cfg, split_conjuncts(s), cfg.trace)
        if not ok:
            self._prune(cfg.trace, layer)
            return None
        child = cfg.clone()
        self.post(child, s)
        child.witness = model
        return child

    def _bottom(self, cfg: Configuration, v: Violation) -> list:
        return [replace(cfg, instrs=(), status=BOTTOM, violation=v)]

    def step(self, cfg: Configuration) -> list:
        """Successors of a running configuration (its store may be reused)."""
        self.stats["steps"] += 1
        if not cfg.instrs:
            return [replace(cfg, status=TOP)]
        i, rest = cfg.instrs[0], cfg.instrs[1:]
        if isinstance(i, Block):
            return [replace(cfg, instrs=tuple(i.body) + rest)]
        if isinstance(i, If):
            return self._branch(cfg, i, (i.then,) + rest,
                                rest if i.orelse is None else (i.orelse,) + rest)
        if isinstance(i, While):
            return self._branch(cfg, i, (i.body, i) + rest, rest)
        if isinstance(i, (Assign, ArrayAssign, Return)):
            exprs = (i.index, i.value) if isinstance(i, ArrayAssign) else (i.value,)
            bots, cfg = self._overflow(cfg, exprs, i)
            if cfg is None:
                return bots
            if isinstance(i, Return):
                return bots + self._return(cfg, i)
            if isinstance(i, ArrayAssign):
                return bots + self._array_assign(cfg, i, rest)
            if isinstance(i.value, Call):
                return bots + self._call(cfg, i, rest)
            return bots + self._assign(cfg, i, rest)
        if isinstance(i, Assert):
            c = expand_quantifiers(i.cond, cfg.sigma)
            neg = simplify(negate(c), cfg.known)
            m = self.counter(cfg, neg, cfg.trace)
            if m is None:
                return [replace(cfg, instrs=rest)]
            bots, nxt = self._violation(cfg, Violation(
                ASSERTION_VIOLATION, m, cfg.trace, self._line(i), "assertion may fail"),
                complement(neg))
            return bots + ([replace(nxt, instrs=rest)] if nxt is not None else [])
        if isinstance(i, Enforce):
            nxt = self._assume(cfg, expand_quantifiers(i.cond, cfg.sigma))
            return [replace(nxt, instrs=rest)] if nxt is not None else []
        raise TypeError(i)

    def _return(self, cfg: Configuration, i: Return) -> list:
        t = self.term(cfg, i.value)
        if isinstance(t, SConst) and not self.kmin <= t.value <= self.kmax:
            self._prune(cfg.trace, "domain")
            return []
        if not self.post(cfg, CRel("==", RESULT, t)):
            self._prune(cfg.trace, "fold")
            return []
        self._extend_witness(cfg, {RESULT: t})
        return [replace(cfg, instrs=(), status=TOP)]

    def _branch(self, cfg: Configuration, node, then_instrs, else_instrs) -> list:
        if len(cfg.trace) >= self.opts.max_depth:
            raise ResourceError(f"more than {self.opts.max_depth} decisions on one path",
                                cfg.trace)
        c = expand_quantifiers(node.cond, cfg.sigma)
        line = self._line(node)
        cases = ((f"T{line}", simplify(c, cfg.known), then_instrs),
                 (f"F{line}", simplify(negate(c), cfg.known), else_instrs))
        out = []
        for tag, s, instrs in cases:
            trace = cfg.trace + (tag,)
            if s == FALSE:
                self._prune(trace, "fold")
                continue
            if s == TRUE:
                out.append(replace(cfg, instrs=instrs, trace=trace))
                continue
            ok, model, layer = self.feasible(cfg, split_conjuncts(s), trace)
            if not ok:
                self._prune(trace, layer)
                continue
            child = cfg.clone()
            self.post(child, s)
            child.instrs, child.trace, child.witness = instrs, trace, model
            out.append(child)
        return out

    def _assign(self, cfg: Configuration, i: Assign, rest) -> list:
        t = self.term(cfg, i.value)
        if isinstance(t, SConst) and not self.kmin <= t.value <= self.kmax:
            self._prune(cfg.trace, "domain")
            return []
        sigma, introduced = self._assign_target(cfg, i)
        x = sigma.var(i.target)
        self._extend_witness(cfg, {x: t})
        cfg = replace(cfg, sigma=sigma, introduced=introduced, instrs=rest)
        if not self.post(cfg, CRel("==", x, t)):
            self._prune(cfg.trace, "fold")
            return []
        return [cfg]

    def _array_assign(self, cfg: Configuration, i: ArrayAssign, rest) -> list:
        idx, val = self.term(cfg, i.index), self.term(cfg, i.value)
        if isinstance(val, SConst) and not self.kmin <= val.value <= self.kmax:
            self._prune(cfg.trace, "domain")
            return []
        old = cfg.sigma.arr(i.array)
        sigma = bump(cfg.sigma, i.array)
        new = sigma.arr(i.array)
        self._extend_witness(cfg, {("cells", new): (old, new, idx, val)})
        cfg = replace(cfg, sigma=sigma, instrs=rest)
        if isinstance(idx, SConst):
            if not 0 <= idx.value < old.length:
                self._prune(cfg.trace, "domain")
                return []
            parts = [CRel("==", SCell(new, idx), val)]
            parts += [CRel("==", SCell(new, SConst(j)), SCell(old, SConst(j)))
                      for j in range(old.length) if j != idx.value]
        else:
            parts = [CRel("==", SCell(new, idx), val)]
            parts += [CImplies(CRel("!=", idx, SConst(j)),
                               CRel("==", SCell(new, SConst(j)), SCell(old, SConst(j))))
                      for j in range(old.length)]
        for c in parts:
            if not self.post(cfg, c):
                self._prune(cfg.trace, "fold")
                return []
        return [cfg]

    def _call(self, cfg: Configuration, i: Assign, rest) -> list:
        call = i.value
        contract = self.ast.contract_for(call.name)
        if contract is None:
            raise KeyError(f"no contract for {call.name!r}")
        lengths, env, actual_arrays = [], {}, {}
        for formal, actual in zip(contract.params, call.args):
            if formal.is_array:
                lengths.append(cfg.sigma.length(actual.name))
                env[formal.name] = cfg.sigma.arr(actual.name)
                actual_arrays[formal.name] = actual.name
            else:
                lengths.append(None)
                env[formal.name] = self.term(cfg, actual)
        inst = instantiate_contract(contract, contract_bindings(contract, lengths))
        pre = expand_quantifiers(inst.precondition, cfg.sigma, env)
        neg = simplify(negate(pre), cfg.known)
        m = self.counter(cfg, neg, cfg.trace)
        bots = []
        if m is not None:
            bots, cfg = self._violation(cfg, Violation(
                CONTRACT_VIOLATION, m, cfg.trace, self._line(i),
                f"precondition of {call.name} may not hold"), complement(neg))
            if cfg is None:
                return bots
        sigma = cfg.sigma
        for formal in inst.modifies:
            sigma = bump(sigma, actual_arrays[formal])
            env[formal] = sigma.arr(actual_arrays[formal])
        cfg = replace(cfg, sigma=sigma)
        sigma, introduced = self._assign_target(cfg, i)
        env["result"] = sigma.var(i.target)
        post = expand_quantifiers(inst.postcondition, sigma, env)
        cfg = replace(cfg, sigma=sigma, introduced=introduced, instrs=rest, witness=None)
        if not self.post(cfg, post):
            self._prune(cfg.trace, "fold")
            return bots
        return bots + [cfg]

    def finish(self, cfg: Configuration) -> Optional[Violation]:
        """Check a terminal configuration; counts it when feasible."""
        ok, model, layer = self.feasible(cfg, (), cfg.trace, final=True)
        if not ok:
            self._prune(cfg.trace, layer)
            return None
        cfg.witness = model
        self.feasible_paths += 1
        env = {"result": RESULT} if self.ast.returns else None
        post = expand_quantifiers(self.ast.postcondition, cfg.sigma, env)
        neg = simplify(negate(post), cfg.known)
        m = self.counter(cfg, neg, cfg.trace)
        if m is None:
            return None
        return Violation(POSTCONDITION_VIOLATION, m, cfg.trace, None,
                         "postcondition may not hold")

    def run(self, worklist: list) -> Optional[Violation]:
        """Depth-first search; the first violation in trace order, if any."""
        first = None
        while worklist:
            cfg = worklist.pop()
            if cfg.status == RUNNING:
                worklist.extend(reversed(self.step(cfg)))
                continue
            v = self.finish(cfg) if cfg.status == TOP else cfg.violation
            if v is None:
                continue
            self.stats["violations"] = self.stats.get("violations", 0) + 1
            self.kinds.add(v.kind)
            if first is None:
                first = v
            if not self.opts.exhaustive:
                break
        return first


# -- reports -----------------------------------------------------------------------

def witness_of(ast: ProgramAst, m: Optional[Model]) -> Optional[dict]:
    """Inputs (version 0) of ``m`` plus ``result`` when the model has it."""
    if m is None:
        return None
    out = {}
    for p in ast.params:
        if p.is_array:
            n = array_length(ast, p.name)
            out[p.name] = list(m.arrays.get((p.name, 0), [0] * n))
        else:
            out[p.name] = m.vars.get((p.name, 0), 0)
    if ("result", 0) in m.vars:
        out["result"] = m.vars[("result", 0)]
    return out


def _report(ast, violation, feasible, pruned, stats, started, kinds=()) -> VerificationReport:
    r = VerificationReport(ast.name, PARTIALLY_CORRECT, feasible_paths=feasible,
                           pruned=list(pruned), stats=dict(stats),
                           elapsed=time.perf_counter() - started, kinds=frozenset(kinds))
    if violation is not None:
        r.verdict = violation.kind
        r.model = violation.model
        r.witness = witness_of(ast, violation.model)
        r.trace = violation.trace
        r.line = violation.line
        r.message = violation.message
    return r


def _subtree(ast, opts, cfg):
    ex = Explorer(ast, opts)
    v = ex.run([cfg])
    return v, ex.feasible_paths, ex.pruned, ex.stats, ex.kinds


def explore(ast: ProgramAst, opts: ExploreOptions = ExploreOptions()) -> VerificationReport:
    """Verify ``ast`` (with concrete lengths) and stop at the first violation."""
    started = time.perf_counter()
    ex = Explorer(ast, opts)
    root = ex.initial()
    if root is None:
        return _report(ast, None, 0, [], ex.stats, started)
    if opts.jobs <= 1:
        v = ex.run([root])
        return _report(ast, v, ex.feasible_paths, ex.pruned, ex.stats, started, ex.kinds)
    return _explore_parallel(ast, opts, ex, root, started)


def _explore_parallel(ast, opts, ex: Explorer, root, started) -> VerificationReport:
    # expand the leftmost running configuration until the frontier is wide enough
    frontier = [root]
    target = 4 * opts.jobs
    while len(frontier) < target:
        k = next((n for n, c in enumerate(frontier) if c.status == RUNNING), None)
        if k is None:
            break
        frontier[k:k + 1] = ex.step(frontier[k])
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=opts.jobs, mp_context=ctx) as pool:
        futures = [pool.submit(_subtree, ast, replace(opts, jobs=1), c) for c in frontier]
        results = [f.result() for f in futures]
    feasible, pruned, stats = ex.feasible_paths, list(ex.pruned), dict(ex.stats)
    violation, kinds = None, set(ex.kinds)
    for v, n, pr, st, ks in results:
        kinds |= ks
        feasible += n
        pruned.extend(pr)
        for key, val in st.items():
            stats[key] = stats.get(key, 0) + val
        if v is not None and violation is None:
            violation = v
            if not opts.exhaustive:
                break
    return _report(ast, violation, feasible, pruned, stats, started, kinds)


def step(cfg: Configuration, ast: ProgramAst, opts: ExploreOptions = ExploreOptions()) -> list:
    """One rule application; convenience wrapper around :class:`Explorer`."""
    return Explorer(ast, opts).step(cfg.clone())


def initial_configuration(ast: ProgramAst, opts: ExploreOptions = ExploreOptions()):
    return Explorer(ast, opts).initial()
