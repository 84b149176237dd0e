"""Concrete interpreter and the brute-force verifier built on it.

Both are deliberately independent of the symbolic machinery: they walk the
syntax tree with plain integers. Their semantics follow the bounded reading
used by the executor:

* terms are evaluated over unbounded integers; a value stored into a variable
  or returned must fit the k-bit range, otherwise the run is *blocked* (it
  corresponds to no bounded execution) unless overflow checking is on;
* a bad index or a division by zero makes an atom false in both polarities, so
  a test that neither holds nor fails blocks the run;
* ``assert b`` fails when ``!b`` holds; ``enforce b`` blocks unless ``b`` holds.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .ast import (
    AllDiff, ArrayAssign, Assert, Assign, BinOp, Block, BoolLit, BoolOp, Call, Enforce,
    If, Index, IntLit, Not, ProgramAst, Quant, Rel, Return, Var, While, apply_arith,
    apply_rel,
)
from .constraints import Model
from .parser import (
    array_length, contract_bindings, instantiate_contract, substitute_params,
)

RETURNED, FINISHED, ASSERT_FAIL, BLOCKED = "returned", "finished", "assertion", "blocked"
CONTRACT_FAIL, OVERFLOW = "contract", "overflow"


class StepLimitExceeded(Exception):
    pass


class _Undefined(Exception):
    pass


class _Stop(Exception):
    def __init__(self, status, line=None, message=""):
        self.status, self.line, self.message = status, line, message


class _Return(Exception):
    def __init__(self, value):
        self.value = value


@dataclass
class RunResult:
    status: str
    value: Optional[int] = None
    trace: tuple = ()
    line: Optional[int] = None
    message: str = ""
    scalars: dict = field(default_factory=dict)
    arrays: dict = field(default_factory=dict)


class _Env:
    def __init__(self, scalars, arrays):
        self.scalars = scalars
        self.arrays = arrays


class Interpreter:
    def __init__(self, ast: ProgramAst, bits: int = 8, check_overflow: bool = False,
                 step_limit: int = 1_000_000, callees: Optional[Mapping] = None):
        self.ast = ast
        self.bits = bits
        self.kmin, self.kmax = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
        self.check_overflow = check_overflow
        self.step_limit = step_limit
        self.callees = dict(callees or {})
        self.steps = 0

    # -- expressions -----------------------------------------------------------

    def value(self, e, env: _Env, bound=None, checked=False) -> int:
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, Var):
            if bound and e.name in bound:
                return bound[e.name]
            return env.scalars[e.name]
        if isinstance(e, Index):
            i = self.value(e.index, env, bound, checked)
            arr = env.arrays[e.array]
            if not 0 <= i < len(arr):
                raise _Undefined()
            return arr[i]
        if isinstance(e, BinOp):
            a = self.value(e.left, env, bound, checked)
            b = self.value(e.right, env, bound, checked)
            if e.op == "/" and b == 0:
                raise _Undefined()
            r = apply_arith(e.op, a, b)
            if checked and not self.kmin <= r <= self.kmax:
                raise _Stop(OVERFLOW, None, f"{r} does not fit in {self.bits} bits")
            return r
        raise TypeError(e)

    def truth(self, b, env: _Env, positive=True, bound=None) -> bool:
        """Value of ``b`` (or of ``!b``) read in negation normal form.

        Atoms over undefined terms are false in both polarities.
        """
        if isinstance(b, BoolLit):
            return b.value == positive
        if isinstance(b, Rel):
            try:
                r = apply_rel(b.op, self.value(b.left, env, bound),
                              self.value(b.right, env, bound))
            except _Undefined:
                return False
            return r == positive
        if isinstance(b, Not):
            return self.truth(b.operand, env, not positive, bound)
        if isinstance(b, BoolOp):
            if b.op == "==>":
                left = self.truth(b.left, env, not positive, bound)
                right = self.truth(b.right, env, positive, bound)
                return (left or right) if positive else (left and right)
            left = self.truth(b.left, env, positive, bound)
            right = self.truth(b.right, env, positive, bound)
            conj = (b.op == "&&") == positive
            return (left and right) if conj else (left or right)
        if isinstance(b, Quant):
            lo = self.value(b.lo, env, bound)
            hi = self.value(b.hi, env, bound)
            inner = dict(bound or {})
            results = []
            for k in range(lo, hi):
                inner[b.var] = k
                results.append(self.truth(b.body, env, positive, inner))
            conj = (b.kind == "forall") == positive
            return all(results) if conj else any(results)
        if isinstance(b, AllDiff):
            vals = env.arrays[b.array]
            return (len(set(vals)) == len(vals)) == positive
        raise TypeError(b)

    # -- statements ------------------------------------------------------------

    def _tag(self, ok: bool, node, trace: list):
        line = node.pos.line - self.ast.header_line + 1 if node.pos else 0
        trace.append(("T" if ok else "F") + str(line))

    def _test(self, cond, env, node, trace) -> bool:
        if self.truth(cond, env, True):
            self._tag(True, node, trace)
            return True
        if self.truth(cond, env, False):
            self._tag(False, node, trace)
            return False
        raise _Stop(BLOCKED, node.pos.line if node.pos else None, "undefined test")

    def _store(self, e, env, node) -> int:
        try:
            v = self.value(e, env, checked=self.check_overflow)
        except _Undefined:
            raise _Stop(BLOCKED, node.pos.line if node.pos else None, "undefined term")
        except _Stop as s:
            s.line = node.pos.line if node.pos else None
            raise
        if not self.kmin <= v <= self.kmax:
            if self.check_overflow:
                raise _Stop(OVERFLOW, node.pos.line if node.pos else None,
                            f"{v} does not fit in {self.bits} bits")
            raise _Stop(BLOCKED, node.pos.line if node.pos else None, "out of range")
        return v

    def exec(self, i, env: _Env, trace: list):
        self.steps += 1
        if self.steps > self.step_limit:
            raise StepLimitExceeded(f"more than {self.step_limit} steps")
        if isinstance(i, Block):
            for j in i.body:
                self.exec(j, env, trace)
        elif isinstance(i, Assign):
            if isinstance(i.value, Call):
                env.scalars[i.target] = self.call(i.value, env, i)
            else:
                env.scalars[i.target] = self._store(i.value, env, i)
        elif isinstance(i, ArrayAssign):
            try:
                idx = self.value(i.index, env, checked=self.check_overflow)
            except _Undefined:
                raise _Stop(BLOCKED, i.pos.line if i.pos else None, "undefined term")
            v = self._store(i.value, env, i)
            arr = env.arrays[i.array]
            if not 0 <= idx < len(arr):
                raise _Stop(BLOCKED, i.pos.line if i.pos else None, "index out of bounds")
            arr[idx] = v
        elif isinstance(i, If):
            if self._test(i.cond, env, i, trace):
                self.exec(i.then, env, trace)
            elif i.orelse is not None:
                self.exec(i.orelse, env, trace)
        elif isinstance(i, While):
            while self._test(i.cond, env, i, trace):
                self.exec(i.body, env, trace)
                self.steps += 1
                if self.steps > self.step_limit:
                    raise StepLimitExceeded(f"more than {self.step_limit} steps")
        elif isinstance(i, Assert):
            if self.truth(i.cond, env, False):
                raise _Stop(ASSERT_FAIL, i.pos.line if i.pos else None, "assertion failed")
        elif isinstance(i, Enforce):
            if not self.truth(i.cond, env, True):
                raise _Stop(BLOCKED, i.pos.line if i.pos else None, "enforce failed")
        elif isinstance(i, Return):
            raise _Return(self._store(i.value, env, i))
        else:
            raise TypeError(i)

    def call(self, c: Call, env: _Env, node) -> int:
        contract = self.ast.contract_for(c.name)
        raw = self.callees.get(c.name)
        if raw is None:
            raise KeyError(f"no implementation available for {c.name!r}")
        scalars, arrays, lengths = {}, {}, []
        for formal, actual in zip(contract.params, c.args):
            if formal.is_array:
                arrays[formal.name] = env.arrays[actual.name]  # by reference
                lengths.append(len(env.arrays[actual.name]))
            else:
                try:
                    scalars[formal.name] = self.value(actual, env)
                except _Undefined:
                    raise _Stop(BLOCKED, node.pos.line if node.pos else None,
                                "undefined argument")
                lengths.append(None)
        inst = instantiate_contract(contract, contract_bindings(contract, lengths))
        callee = substitute_params(raw, contract_bindings(raw.contract(), lengths))
        callee_env = _Env(scalars, arrays)
        if self.truth(inst.precondition, callee_env, False):
            raise _Stop(CONTRACT_FAIL, node.pos.line if node.pos else None,
                        f"precondition of {c.name} violated")
        sub = Interpreter(callee, self.bits, self.check_overflow, self.step_limit, self.callees)
        r = sub.run_env(callee_env)
        self.steps += sub.steps
        if r.status != RETURNED:
            # the callee is trusted through its contract; a failing callee run
            # has no counterpart in the modular semantics
            raise _Stop(BLOCKED, node.pos.line if node.pos else None,
                        f"callee {c.name} ended with {r.status}")
        return r.value

    def run_env(self, env: _Env) -> RunResult:
        trace: list = []
        try:
            for i in self.ast.body:
                self.exec(i, env, trace)
        except _Return as r:
            return RunResult(RETURNED, r.value, tuple(trace), None, "", env.scalars, env.arrays)
        except _Stop as s:
            return RunResult(s.status, None, tuple(trace), s.line, s.message,
                             env.scalars, env.arrays)
        return RunResult(FINISHED, None, tuple(trace), None, "", env.scalars, env.arrays)


def _inputs(ast: ProgramAst, inputs) -> _Env:
    if isinstance(inputs, Model):
        src = {}
        for (n, v), val in inputs.vars.items():
            if v == 0:
                src[n] = val
        for (n, v), vals in inputs.arrays.items():
            if v == 0:
                src[n] = list(vals)
    else:
        src = dict(inputs)
    scalars, arrays = {}, {}
    for p in ast.params:
        if p.is_array:
            vals = list(src.get(p.name, [0] * array_length(ast, p.name)))
            if len(vals) != array_length(ast, p.name):
                raise ValueError(f"array {p.name!r} needs {array_length(ast, p.name)} values")
            arrays[p.name] = vals
        else:
            scalars[p.name] = int(src.get(p.name, 0))
    return _Env(scalars, arrays)


def concrete_interpret(ast: ProgramAst, inputs, bits: int = 8, check_overflow=False,
                       step_limit: int = 1_000_000, callees=None) -> RunResult:
    """Run ``ast`` (with concrete lengths) on ``inputs``.

    ``inputs`` maps parameter names to ints or lists, or is a model whose
    version-0 values are used. ``callees`` maps callee names to their
    concrete programs.
    """
    it = Interpreter(ast, bits, check_overflow, step_limit, callees)
    return it.run_env(_inputs(ast, inputs))


def precondition_holds(ast: ProgramAst, inputs, bits: int = 8) -> bool:
    it = Interpreter(ast, bits)
    return it.truth(ast.precondition, _inputs(ast, inputs), True)


def postcondition_fails(ast: ProgramAst, pre_inputs, run: RunResult, bits: int = 8) -> bool:
    """True when ``!post`` holds in the final state of ``run``."""
    it = Interpreter(ast, bits)
    env = _Env(dict(run.scalars), {k: list(v) for k, v in run.arrays.items()})
    bound = {"result": run.value} if run.value is not None else None
    return it.truth(ast.postcondition, env, False, bound)


# -- brute force -----------------------------------------------------------------

POSTCONDITION = "postcondition"


@dataclass
class BruteForceResult:
    verdict: str                     # "correct" or the kind of the first violation
    kinds: frozenset = frozenset()
    witness: Optional[dict] = None
    inputs_checked: int = 0
    runs: int = 0


def outcome(ast, inputs, bits, check_overflow=False, callees=None) -> Optional[str]:
    """Violation kind produced by one concrete input, or None."""
    env = _inputs(ast, inputs)
    it = Interpreter(ast, bits, check_overflow, callees=callees)
    if not it.truth(ast.precondition, env, True):
        return None
    r = it.run_env(_Env(dict(env.scalars), {k: list(v) for k, v in env.arrays.items()}))
    if r.status in (ASSERT_FAIL, CONTRACT_FAIL, OVERFLOW):
        return r.status
    if r.status == BLOCKED:
        return None
    if postcondition_fails(ast, inputs, r, bits):
        return POSTCONDITION
    return None


def brute_force_verify(ast: ProgramAst, bits: int = 4, check_overflow: bool = False,
                       callees=None, max_inputs: int = 1_000_000,
                       stop_at_first: bool = False) -> BruteForceResult:
    """Enumerate every k-bit input, run it and check the contract."""
    kmin, kmax = -(1 << (bits - 1)), (1 << (bits - 1))
    slots = []
    for p in ast.params:
        slots.extend([p.name] * (array_length(ast, p.name) if p.is_array else 1))
    space = (kmax - kmin) ** len(slots)
    if space > max_inputs:
        raise ValueError(f"input space of {space} assignments exceeds {max_inputs}")
    kinds, first = set(), None
    checked = runs = 0
    for combo in itertools.product(range(kmin, kmax), repeat=len(slots)):
        checked += 1
        inputs, k = {}, 0
        for p in ast.params:
            if p.is_array:
                n = array_length(ast, p.name)
                inputs[p.name] = list(combo[k:k + n])
                k += n
            else:
                inputs[p.name] = combo[k]
                k += 1
        env = _inputs(ast, inputs)
        it = Interpreter(ast, bits, check_overflow, callees=callees)
        if not it.truth(ast.precondition, env, True):
            continue
        runs += 1
        kind = outcome(ast, inputs, bits, check_overflow, callees)
        if kind is not None:
            kinds.add(kind)
            if first is None:
                first = (kind, inputs)
                if stop_at_first:
                    break
    if first is None:
        return BruteForceResult("correct", frozenset(), None, checked, runs)
    return BruteForceResult(first[0], frozenset(kinds), first[1], checked, runs)
