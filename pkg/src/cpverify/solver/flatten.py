"""Flattening of constraint stores into solver primitives.

Every solver term becomes an integer variable. Linear sub-terms are kept as
sparse forms; a form over two or more variables that is not a plain
difference gets its own auxiliary variable so that parallel atoms meet on
the same bounds. Products, divisions and variable-index reads become
auxiliary variables tied to their operands by a defining primitive.

Products and linear forms are total and their definitions are global.
Element reads and divisions are partial (bad index, zero divisor), so their
definitions live in the disjunct that mentions them: an atom over an
undefined term is false.
"""
from __future__ import annotations

from math import gcd
from typing import Iterable

from ..ast import tdiv
from ..constraints import (
    CAllDiff, CAnd, CBool, COr, CRel, SArr, SBin, SCell, SConst, SVar, nnf,
)


# -- primitives -------------------------------------------------------------

class Prim:
    __slots__ = ("vars",)
    kind = "?"


class Bnd(Prim):
    """``x op c`` with op in le/ge/eq/ne."""
    __slots__ = ("x", "op", "c")
    kind = "bnd"

    def __init__(self, x, op, c):
        self.x, self.op, self.c = x, op, c
        self.vars = (x,)

    def __repr__(self):
        return f"Bnd(v{self.x} {self.op} {self.c})"


class Dif(Prim):
    """``x - y op c`` with op in le/eq/ne."""
    __slots__ = ("x", "y", "op", "c")
    kind = "dif"

    def __init__(self, x, y, op, c):
        self.x, self.y, self.op, self.c = x, y, op, c
        self.vars = (x, y)

    def __repr__(self):
        return f"Dif(v{self.x} - v{self.y} {self.op} {self.c})"


class Lin(Prim):
    """``s = sum(a * x) + c``."""
    __slots__ = ("s", "terms", "c")
    kind = "lin"

    def __init__(self, s, terms, c):
        self.s, self.terms, self.c = s, tuple(terms), c
        self.vars = (s,) + tuple(x for _, x in self.terms)

    def __repr__(self):
        body = " + ".join(f"{a}*v{x}" for a, x in self.terms)
        return f"Lin(v{self.s} = {body} + {self.c})"


class Prod(Prim):
    """``z = x * y``."""
    __slots__ = ("z", "x", "y")
    kind = "prod"

    def __init__(self, z, x, y):
        self.z, self.x, self.y = z, x, y
        self.vars = (z, x, y)

    def __repr__(self):
        return f"Prod(v{self.z} = v{self.x} * v{self.y})"


class Div(Prim):
    """``z = x / y`` truncating toward zero, ``y != 0``."""
    __slots__ = ("z", "x", "y")
    kind = "div"

    def __init__(self, z, x, y):
        self.z, self.x, self.y = z, x, y
        self.vars = (z, x, y)

    def __repr__(self):
        return f"Div(v{self.z} = v{self.x} / v{self.y})"


class Elem(Prim):
    """``z = cells[idx]`` with ``0 <= idx < len(cells)``."""
    __slots__ = ("z", "idx", "cells")
    kind = "elem"

    def __init__(self, z, idx, cells):
        self.z, self.idx, self.cells = z, idx, tuple(cells)
        self.vars = (z, idx) + self.cells

    def __repr__(self):
        return f"Elem(v{self.z} = [{', '.join(f'v{c}' for c in self.cells)}][v{self.idx}])"


class AllDiffP(Prim):
    __slots__ = ("xs",)
    kind = "alldiff"

    def __init__(self, xs):
        self.xs = tuple(xs)
        self.vars = self.xs

    def __repr__(self):
        return f"AllDiff({', '.join(f'v{x}' for x in self.xs)})"


class OrP(Prim):
    """Disjunction of conjunctions of primitives."""
    __slots__ = ("alts",)
    kind = "or"

    def __init__(self, alts):
        self.alts = tuple(tuple(a) for a in alts)
        seen = []
        for alt in self.alts:
            for p in alt:
                for v in p.vars:
                    if v not in seen:
                        seen.append(v)
        self.vars = tuple(seen)

    def __repr__(self):
        return "Or(" + " | ".join("&".join(map(repr, a)) for a in self.alts) + ")"


class FalseP(Prim):
    __slots__ = ()
    kind = "false"

    def __init__(self):
        self.vars = ()

    def __repr__(self):
        return "False"


FALSE_P = FalseP()


class _Undef(Exception):
    pass


class _Ctx(list):
    """A conjunction being built; remembers which partial definitions it holds."""

    def __init__(self):
        super().__init__()
        self.defs = set()


# -- the flattened problem -------------------------------------------------

class Problem:
    """Variables, initial domains and primitives of one flattened store."""

    def __init__(self, bits: int):
        self.bits = bits
        self.kmin = -(1 << (bits - 1))
        self.kmax = (1 << (bits - 1)) - 1
        self.lo: list = []
        self.hi: list = []
        self.base: list = []        # True for program variables and cells
        self.labels: list = []      # printable name per variable
        self.key_var: dict = {}     # SVar | (SArr, i) -> var
        self.arrays: dict = {}      # (name, version) -> SArr
        self.top: list = []
        self.node: list = []        # var -> DBM node (0 = none)
        self.node_var: list = [0]   # DBM node -> var
        self._parent: dict = {}
        self._consts: dict = {}
        self._forms: dict = {}
        self._prods: dict = {}
        self._divs: dict = {}
        self._elems: dict = {}

    @property
    def nvars(self) -> int:
        return len(self.lo)

    def cheap_prims(self) -> list:
        return [p for p in self.top if p.kind in ("bnd", "dif", "lin", "false")]

    # union-find over keys, filled before any variable exists
    def _find(self, k):
        p = self._parent
        while k in p:
            k = p[k]
        return k

    def _union(self, a, b):
        a, b = self._find(a), self._find(b)
        if a != b:
            self._parent[b] = a

    def _new(self, lo, hi, base, label) -> int:
        self.lo.append(lo)
        self.hi.append(hi)
        self.base.append(base)
        self.labels.append(label)
        return len(self.lo) - 1

    def var_for_key(self, key) -> int:
        key = self._find(key)
        v = self.key_var.get(key)
        if v is None:
            label = str(key) if isinstance(key, SVar) else f"{key[0]}[{key[1]}]"
            v = self._new(self.kmin, self.kmax, True, label)
            self.key_var[key] = v
        return v

    def const_var(self, c: int) -> int:
        v = self._consts.get(c)
        if v is None:
            v = self._new(c, c, False, str(c))
            self._consts[c] = v
        return v

    def _range(self, terms, c):
        lo = hi = c
        for a, x in terms:
            if a > 0:
                lo += a * self.lo[x]
                hi += a * self.hi[x]
            else:
                lo += a * self.hi[x]
                hi += a * self.lo[x]
        return lo, hi

    def form_var(self, terms, c) -> int:
        key = (terms, c)
        v = self._forms.get(key)
        if v is None:
            lo, hi = self._range(terms, c)
            v = self._new(lo, hi, False, "lin")
            self._forms[key] = v
            self.top.append(Lin(v, terms, c))
        return v

    def prod_var(self, x, y) -> int:
        key = (min(x, y), max(x, y))
        v = self._prods.get(key)
        if v is None:
            corners = [a * b for a in (self.lo[x], self.hi[x]) for b in (self.lo[y], self.hi[y])]
            lo, hi = min(corners), max(corners)
            if x == y:
                lo = max(lo, 0)
            v = self._new(lo, hi, False, "mul")
            self._prods[key] = v
            self.top.append(Prod(v, x, y))
        return v

    def div_var(self, x, y, ctx) -> int:
        key = (x, y)
        v = self._divs.get(key)
        if v is None:
            m = max(abs(self.lo[x]), abs(self.hi[x]))
            v = self._new(-m, m, False, "div")
            self._divs[key] = v
        if ("div", key) not in ctx.defs:
            ctx.defs.add(("div", key))
            ctx.append(Div(v, x, y))
        return v

    def cells_of(self, arr: SArr) -> list:
        self.arrays[(arr.name, arr.version)] = arr
        return [self.var_for_key((arr, i)) for i in range(arr.length)]

    def elem_var(self, arr: SArr, idx: int, ctx) -> int:
        key = (arr, idx)
        cells = self.cells_of(arr)
        v = self._elems.get(key)
        if v is None:
            v = self._new(min(self.lo[c] for c in cells), max(self.hi[c] for c in cells),
                          False, f"{arr}[.]")
            self._elems[key] = v
        if ("elem", key) not in ctx.defs:
            ctx.defs.add(("elem", key))
            ctx.append(Elem(v, idx, cells))
        return v

    # -- terms ---------------------------------------------------------------

    def lin(self, e, ctx):
        """``e`` as a sparse linear form ``({var: coef}, const)``."""
        if isinstance(e, SConst):
            return {}, e.value
        if isinstance(e, SVar):
            return {self.var_for_key(e): 1}, 0
        if isinstance(e, SCell):
            self.arrays[(e.array.name, e.array.version)] = e.array
            d, c = self.lin(e.index, ctx)
            if not d:
                if not 0 <= c < e.array.length:
                    raise _Undef()
                return {self.var_for_key((e.array, c)): 1}, 0
            return {self.elem_var(e.array, self.to_var((d, c)), ctx): 1}, 0
        if isinstance(e, SBin):
            ld, lc = self.lin(e.left, ctx)
            rd, rc = self.lin(e.right, ctx)
            if e.op in "+-":
                s = 1 if e.op == "+" else -1
                out = dict(ld)
                for x, a in rd.items():
                    out[x] = out.get(x, 0) + s * a
                return {x: a for x, a in out.items() if a}, lc + s * rc
            if e.op == "*":
                if not ld:
                    return ({x: lc * a for x, a in rd.items() if lc * a}, lc * rc)
                if not rd:
                    return ({x: rc * a for x, a in ld.items() if rc * a}, lc * rc)
                return {self.prod_var(self.to_var((ld, lc)), self.to_var((rd, rc))): 1}, 0
            if e.op == "/":
                if not rd and rc == 0:
                    raise _Undef()
                if not ld and not rd:
                    return {}, tdiv(lc, rc)
                return {self.div_var(self.to_var((ld, lc)), self.to_var((rd, rc)), ctx): 1}, 0
        raise TypeError(e)

    def to_var(self, form) -> int:
        d, c = form
        if not d:
            return self.const_var(c)
        if len(d) == 1 and c == 0:
            (x, a), = d.items()
            if a == 1:
                return x
        return self.form_var(tuple(sorted((a, x) for x, a in d.items())), c)

    # -- atoms ---------------------------------------------------------------

    def atom(self, op, left, right, ctx):
        try:
            ld, lc = self.lin(left, ctx)
            rd, rc = self.lin(right, ctx)
        except _Undef:
            ctx.append(FALSE_P)
            return
        d = dict(ld)
        for x, a in rd.items():
            d[x] = d.get(x, 0) - a
        d = {x: a for x, a in d.items() if a}
        c = lc - rc
        # normalise to  sum + c  (le | eq | ne)  0
        if op == "<":
            kind, c = "le", c + 1
        elif op == "<=":
            kind = "le"
        elif op == ">":
            d, c, kind = {x: -a for x, a in d.items()}, -c + 1, "le"
        elif op == ">=":
            d, c, kind = {x: -a for x, a in d.items()}, -c, "le"
        elif op == "==":
            kind = "eq"
        else:
            kind = "ne"
        p = self._classify(d, c, kind)
        if p is not None:
            ctx.append(p)

    def _classify(self, d, c, kind):
        if not d:
            ok = c <= 0 if kind == "le" else (c == 0) == (kind == "eq")
            return None if ok else FALSE_P
        items = sorted(d.items())
        if len(items) == 2 and items[0][1] == -items[1][1]:
            (x, a), (y, _) = items
            return self._unary(a, c, kind, lambda op, k: (
                Dif(x, y, op, k) if op != "ge" else Dif(y, x, "le", -k)))
        if len(items) == 1:
            (x, a), = items
            return self._unary(a, c, kind, lambda op, k: Bnd(x, op, k))
        g = 0
        for _, a in items:
            g = gcd(g, a)
        if items[0][1] < 0:
            g = -g
        s = self.form_var(tuple((a // g, x) for x, a in items), 0)
        return self._unary(g, c, kind, lambda op, k: Bnd(s, op, k))

    @staticmethod
    def _unary(a, c, kind, make):
        """Solve ``a*u + c kind 0`` for ``u`` and build the primitive."""
        if kind == "le":
            if a > 0:
                return make("le", (-c) // a)
            return make("ge", -((-c) // -a))
        if (-c) % a:
            return FALSE_P if kind == "eq" else None
        return make(kind, (-c) // a)

    # -- constraints -----------------------------------------------------------

    def add(self, c, ctx):
        if isinstance(c, CBool):
            if not c.value:
                ctx.append(FALSE_P)
        elif isinstance(c, CRel):
            self.atom(c.op, c.left, c.right, ctx)
        elif isinstance(c, CAnd):
            for i in c.items:
                self.add(i, ctx)
        elif isinstance(c, COr):
            alts = []
            for i in c.items:
                sub = _Ctx()
                self.add(i, sub)
                if any(p is FALSE_P for p in sub):
                    continue
                if not sub:
                    return
                alts.append(tuple(sub))
            if not alts:
                ctx.append(FALSE_P)
            elif len(alts) == 1:
                ctx.extend(alts[0])
            else:
                ctx.append(OrP(alts))
        elif isinstance(c, CAllDiff):
            ctx.append(AllDiffP(self.cells_of(c.array)))
        else:
            raise TypeError(c)

    def _assign_nodes(self):
        nodes = set()

        def visit(ps):
            for p in ps:
                if p.kind == "dif":
                    nodes.add(p.x)
                    nodes.add(p.y)
                elif p.kind == "elem":
                    nodes.add(p.z)
                    nodes.update(p.cells)
                elif p.kind == "or":
                    for alt in p.alts:
                        visit(alt)
        visit(self.top)
        self.node = [0] * self.nvars
        for v in sorted(nodes):
            self.node[v] = len(self.node_var)
            self.node_var.append(v)


def _key(t):
    if isinstance(t, SVar):
        return t
    if isinstance(t, SCell) and isinstance(t.index, SConst) and 0 <= t.index.value < t.array.length:
        return (t.array, t.index.value)
    return None


def flatten(items: Iterable, bits: int) -> Problem:
    """Flatten a conjunction of constraints over ``bits``-bit integers."""
    pb = Problem(bits)
    conjuncts = []
    for c in items:
        c = nnf(c)
        stack = [c]
        while stack:
            x = stack.pop()
            if isinstance(x, CAnd):
                stack.extend(reversed(x.items))
            else:
                conjuncts.append(x)
    # merge variables that are plainly equal at top level
    for c in conjuncts:
        if isinstance(c, CRel) and c.op == "==":
            a, b = _key(c.left), _key(c.right)
            if a is not None and b is not None:
                pb._union(a, b)
    top = _Ctx()
    for c in conjuncts:
        pb.add(c, top)
    pb.top = list(top) + pb.top
    pb._assign_nodes()
    return pb
