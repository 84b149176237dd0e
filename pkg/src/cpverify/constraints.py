"""Constraints over versioned solver variables and the stores that hold them.

Solver terms mirror the program grammar but every variable carries an
explicit version (``v^3``) and every array reference names one version of the
array (``t^1[e]``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .ast import apply_arith, apply_rel, tdiv


# -- solver expressions ---------------------------------------------------

@dataclass(frozen=True)
class SConst:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class SVar:
    name: str
    version: int

    def __str__(self):
        return f"{self.name}^{self.version}"


@dataclass(frozen=True)
class SArr:
    name: str
    version: int
    length: int

    def __str__(self):
        return f"{self.name}^{self.version}"


@dataclass(frozen=True)
class SCell:
    array: SArr
    index: "SExpr"

    def __str__(self):
        return f"{self.array}[{self.index}]"


@dataclass(frozen=True)
class SBin:
    op: str
    left: "SExpr"
    right: "SExpr"

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


SExpr = (SConst, SVar, SCell, SBin)


# -- constraints ------------------------------------------------------------

@dataclass(frozen=True)
class CBool:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class CRel:
    op: str
    left: object
    right: object

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class CNot:
    operand: object

    def __str__(self):
        return f"!({self.operand})"


@dataclass(frozen=True)
class CAnd:
    items: tuple

    def __str__(self):
        if not self.items:
            return "true"
        return "(" + " && ".join(str(c) for c in self.items) + ")"


@dataclass(frozen=True)
class COr:
    items: tuple

    def __str__(self):
        if not self.items:
            return "false"
        return "(" + " || ".join(str(c) for c in self.items) + ")"


@dataclass(frozen=True)
class CImplies:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} ==> {self.right})"


@dataclass(frozen=True)
class CAllDiff:
    array: SArr

    def __str__(self):
        return f"alldifferent({self.array})"


TRUE = CBool(True)
FALSE = CBool(False)

_FLIP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def conj(items: Iterable) -> object:
    items = tuple(items)
    if len(items) == 1:
        return items[0]
    return CAnd(items)


def disj(items: Iterable) -> object:
    items = tuple(items)
    if len(items) == 1:
        return items[0]
    return COr(items)


def nnf(c) -> object:
    """Negation-normal form: negations only survive inside relational atoms."""
    if isinstance(c, (CBool, CRel, CAllDiff)):
        return c
    if isinstance(c, CAnd):
        return CAnd(tuple(nnf(i) for i in c.items))
    if isinstance(c, COr):
        return COr(tuple(nnf(i) for i in c.items))
    if isinstance(c, CImplies):
        return COr((negate(c.left), nnf(c.right)))
    if isinstance(c, CNot):
        return negate(c.operand)
    raise TypeError(f"not a constraint: {c!r}")


def negate(c) -> object:
    """NNF of the negation of ``c``.

    Relational atoms flip, ``alldifferent`` becomes a disjunction of pairwise
    equalities.
    """
    if isinstance(c, CBool):
        return CBool(not c.value)
    if isinstance(c, CRel):
        return CRel(_FLIP[c.op], c.left, c.right)
    if isinstance(c, CNot):
        return nnf(c.operand)
    if isinstance(c, CAnd):
        if not c.items:
            return FALSE
        return COr(tuple(negate(i) for i in c.items))
    if isinstance(c, COr):
        if not c.items:
            return TRUE
        return CAnd(tuple(negate(i) for i in c.items))
    if isinstance(c, CImplies):
        return CAnd((nnf(c.left), negate(c.right)))
    if isinstance(c, CAllDiff):
        a = c.array
        pairs = [CRel("==", SCell(a, SConst(i)), SCell(a, SConst(j)))
                 for i in range(a.length) for j in range(i + 1, a.length)]
        return COr(tuple(pairs)) if pairs else FALSE
    raise TypeError(f"not a constraint: {c!r}")


def _undefined(t) -> list:
    """Disjuncts whose truth means ``t`` has no value."""
    if isinstance(t, SCell):
        out = _undefined(t.index)
        if not (isinstance(t.index, SConst) and 0 <= t.index.value < t.array.length):
            out += [CRel("<", t.index, SConst(0)),
                    CRel(">=", t.index, SConst(t.array.length))]
        return out
    if isinstance(t, SBin):
        out = _undefined(t.left) + _undefined(t.right)
        if t.op == "/" and not (isinstance(t.right, SConst) and t.right.value != 0):
            out.append(CRel("==", t.right, SConst(0)))
        return out
    return []


def complement(c) -> object:
    """A constraint that holds exactly where ``c`` does not.

    Unlike :func:`negate`, partial terms are accounted for: an atom over an
    undefined term is false, so its complement is true there.
    """
    c = nnf(c)
    if isinstance(c, CBool):
        return CBool(not c.value)
    if isinstance(c, CRel):
        return disj([CRel(_FLIP[c.op], c.left, c.right)]
                    + _undefined(c.left) + _undefined(c.right))
    if isinstance(c, CAnd):
        return disj(complement(i) for i in c.items) if c.items else FALSE
    if isinstance(c, COr):
        return conj(complement(i) for i in c.items) if c.items else TRUE
    if isinstance(c, CAllDiff):
        return negate(c)
    raise TypeError(f"not a constraint: {c!r}")


# -- traversal helpers -----------------------------------------------------

def iter_terms(c) -> Iterator:
    """Yield every solver expression and array reference reachable from ``c``."""
    if isinstance(c, (SConst, SVar)):
        yield c
    elif isinstance(c, SCell):
        yield c
        yield c.array
        yield from iter_terms(c.index)
    elif isinstance(c, SBin):
        yield c
        yield from iter_terms(c.left)
        yield from iter_terms(c.right)
    elif isinstance(c, CRel):
        yield from iter_terms(c.left)
        yield from iter_terms(c.right)
    elif isinstance(c, (CAnd, COr)):
        for i in c.items:
            yield from iter_terms(i)
    elif isinstance(c, CImplies):
        yield from iter_terms(c.left)
        yield from iter_terms(c.right)
    elif isinstance(c, CNot):
        yield from iter_terms(c.operand)
    elif isinstance(c, CAllDiff):
        yield c.array


def versioned_names(c) -> set:
    """The set of ``(identifier, version)`` pairs mentioned by ``c``."""
    out = set()
    for t in iter_terms(c):
        if isinstance(t, (SVar, SArr)):
            out.add((t.name, t.version))
    return out


def arrays_of(c) -> set:
    return {t for t in iter_terms(c) if isinstance(t, SArr)}


# -- evaluation --------------------------------------------------------------

class Undefined(Exception):
    """A term has no value: out-of-bounds index or division by zero."""


@dataclass
class Model:
    """A satisfying assignment: versioned scalars and versioned arrays."""
    vars: dict = field(default_factory=dict)    # (name, version) -> int
    arrays: dict = field(default_factory=dict)  # (name, version) -> list[int]

    def value(self, v: SVar) -> int:
        try:
            return self.vars[(v.name, v.version)]
        except KeyError:
            raise KeyError(f"model has no value for {v}") from None

    def cells(self, a: SArr) -> list:
        try:
            return self.arrays[(a.name, a.version)]
        except KeyError:
            raise KeyError(f"model has no value for {a}") from None

    def project(self, version: int = 0) -> "Model":
        return Model({k: v for k, v in self.vars.items() if k[1] == version},
                     {k: list(v) for k, v in self.arrays.items() if k[1] == version})

    def copy(self) -> "Model":
        return Model(dict(self.vars), {k: list(v) for k, v in self.arrays.items()})

    def to_text(self) -> str:
        lines = []
        for (n, v), val in sorted(self.vars.items()):
            lines.append(f"{n}^{v} = {val}")
        for (n, v), vals in sorted(self.arrays.items()):
            lines.append(f"{n}^{v} = [{', '.join(str(x) for x in vals)}]")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_json(self) -> dict:
        out = {f"{n}^{v}": val for (n, v), val in sorted(self.vars.items())}
        out.update({f"{n}^{v}": list(vals) for (n, v), vals in sorted(self.arrays.items())})
        return out


def eval_sexpr(e, m: Model) -> int:
    if isinstance(e, SConst):
        return e.value
    if isinstance(e, SVar):
        return m.value(e)
    if isinstance(e, SCell):
        i = eval_sexpr(e.index, m)
        if not 0 <= i < e.array.length:
            raise Undefined(f"index {i} out of bounds for {e.array}")
        return m.cells(e.array)[i]
    if isinstance(e, SBin):
        a, b = eval_sexpr(e.left, m), eval_sexpr(e.right, m)
        if e.op == "/" and b == 0:
            raise Undefined("division by zero")
        return apply_arith(e.op, a, b)
    raise TypeError(e)


def _eval_nnf(c, m: Model) -> bool:
    if isinstance(c, CBool):
        return c.value
    if isinstance(c, CRel):
        try:
            return apply_rel(c.op, eval_sexpr(c.left, m), eval_sexpr(c.right, m))
        except Undefined:
            return False
    if isinstance(c, CAnd):
        return all(_eval_nnf(i, m) for i in c.items)
    if isinstance(c, COr):
        return any(_eval_nnf(i, m) for i in c.items)
    if isinstance(c, CAllDiff):
        vals = m.cells(c.array)
        return len(set(vals)) == len(vals)
    raise TypeError(c)


def holds(c, m: Model) -> bool:
    """Truth of ``c`` under ``m``.

    An atom whose terms are undefined is false in either polarity, which is
    the reading the solver gives to partial terms.
    """
    return _eval_nnf(nnf(c), m)


# -- stores ------------------------------------------------------------------

class ConstraintStore:
    """An append-only conjunction with checkpoint/rollback."""

    def __init__(self, items: Iterable = ()):
        self._items: list = list(items)
        self._marks: list = []

    def post(self, c) -> "ConstraintStore":
        self._items.append(c)
        return self

    def extend(self, cs: Iterable) -> "ConstraintStore":
        self._items.extend(cs)
        return self

    def checkpoint(self) -> int:
        self._marks.append(len(self._items))
        return len(self._marks)

    def rollback(self) -> None:
        if not self._marks:
            raise IndexError("rollback without checkpoint")
        del self._items[self._marks.pop():]

    def truncate(self, length: int) -> None:
        if length > len(self._items):
            raise ValueError("cannot truncate a store forward")
        del self._items[length:]
        while self._marks and self._marks[-1] > length:
            self._marks.pop()

    def clone(self) -> "ConstraintStore":
        s = ConstraintStore(self._items)
        s._marks = list(self._marks)
        return s

    def with_constraints(self, cs: Iterable) -> "ConstraintStore":
        return ConstraintStore(self._items + list(cs))

    @property
    def items(self) -> tuple:
        return tuple(self._items)

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        return isinstance(other, ConstraintStore) and self._items == other._items

    def to_text(self) -> str:
        return "".join(f"{c}\n" for c in self._items)

    def holds(self, m: Model) -> bool:
        return all(holds(c, m) for c in self._items)

    def __repr__(self):
        return f"ConstraintStore({len(self._items)} constraints)"


# -- folding used by the executor's on-the-fly simplification ---------------

def fold_sexpr(e, known=None):
    """Constant-fold ``e``, substituting values from ``known`` when given.

    ``known`` maps ``SVar`` and ``(SArr, index)`` keys to integers.
    """
    if isinstance(e, SConst):
        return e
    if isinstance(e, SVar):
        if known is not None and e in known:
            return SConst(known[e])
        return e
    if isinstance(e, SCell):
        idx = fold_sexpr(e.index, known)
        if known is not None and isinstance(idx, SConst):
            v = known.get((e.array, idx.value))
            if v is not None:
                return SConst(v)
        return SCell(e.array, idx)
    if isinstance(e, SBin):
        a, b = fold_sexpr(e.left, known), fold_sexpr(e.right, known)
        if isinstance(a, SConst) and isinstance(b, SConst):
            if e.op == "/" and b.value == 0:
                return SBin(e.op, a, b)
            return SConst(apply_arith(e.op, a.value, b.value))
        return SBin(e.op, a, b)
    raise TypeError(e)


def _undefined_const(e) -> bool:
    """True if ``e`` is certainly undefined (constant bad index or /0)."""
    if isinstance(e, SCell):
        if isinstance(e.index, SConst) and not 0 <= e.index.value < e.array.length:
            return True
        return _undefined_const(e.index)
    if isinstance(e, SBin):
        if e.op == "/" and isinstance(e.right, SConst) and e.right.value == 0:
            return True
        return _undefined_const(e.left) or _undefined_const(e.right)
    return False


def simplify(c, known=None):
    """Fold constants in an NNF constraint and prune trivial connectives."""
    c = nnf(c)
    return _simp(c, known)


def _simp(c, known):
    if isinstance(c, CBool):
        return c
    if isinstance(c, CRel):
        a, b = fold_sexpr(c.left, known), fold_sexpr(c.right, known)
        if _undefined_const(a) or _undefined_const(b):
            return FALSE
        if isinstance(a, SConst) and isinstance(b, SConst):
            return CBool(apply_rel(c.op, a.value, b.value))
        if a == b and not _may_be_undefined(a):
            return CBool(c.op in ("==", "<=", ">="))
        return CRel(c.op, a, b)
    if isinstance(c, CAllDiff):
        return c
    if isinstance(c, CAnd):
        out = []
        for i in c.items:
            s = _simp(i, known)
            if s == FALSE:
                return FALSE
            if s == TRUE:
                continue
            out.extend(s.items if isinstance(s, CAnd) else (s,))
        return conj(out) if out else TRUE
    if isinstance(c, COr):
        out = []
        for i in c.items:
            s = _simp(i, known)
            if s == TRUE:
                return TRUE
            if s == FALSE:
                continue
            out.extend(s.items if isinstance(s, COr) else (s,))
        return disj(out) if out else FALSE
    raise TypeError(c)


def _may_be_undefined(e) -> bool:
    if isinstance(e, SCell):
        return True
    if isinstance(e, SBin):
        return e.op == "/" or _may_be_undefined(e.left) or _may_be_undefined(e.right)
    return False


def split_conjuncts(c) -> list:
    if isinstance(c, CAnd):
        out = []
        for i in c.items:
            out.extend(split_conjuncts(i))
        return out
    if c == TRUE:
        return []
    return [c]


__all__ = [
    "SConst", "SVar", "SArr", "SCell", "SBin", "CBool", "CRel", "CNot", "CAnd",
    "COr", "CImplies", "CAllDiff", "TRUE", "FALSE", "nnf", "negate", "conj", "disj",
    "Model", "ConstraintStore", "holds", "eval_sexpr", "Undefined", "simplify",
    "fold_sexpr", "split_conjuncts", "versioned_names", "iter_terms", "tdiv",
]
