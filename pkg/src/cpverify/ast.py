"""Program-level syntax tree for the ``.cpv`` contract language.

Every node carries an optional source position that is ignored by equality,
so two trees that differ only in layout compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _pos() -> Optional[Pos]:
    return field(default=None, compare=False, repr=False)


# -- integer expressions ---------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Sym:
    """A symbolic bound such as ``N``; replaced by a literal before a run."""
    name: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Index:
    array: str
    index: "Expr"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    pos: Optional[Pos] = _pos()


Expr = Union[IntLit, Var, Sym, Index, BinOp, Call]


# -- boolean expressions ---------------------------------------------------

@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Rel:
    op: str  # one of > >= == != <= <
    left: Expr
    right: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Not:
    operand: "BExpr"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class BoolOp:
    op: str  # one of && || ==>
    left: "BExpr"
    right: "BExpr"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Quant:
    """Bounded quantifier over the half-open range ``[lo, hi)``."""
    kind: str  # forall | exists
    var: str
    lo: Expr
    hi: Expr
    body: "BExpr"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class AllDiff:
    array: str
    pos: Optional[Pos] = _pos()


BExpr = Union[BoolLit, Rel, Not, BoolOp, Quant, AllDiff]


# -- instructions ----------------------------------------------------------

@dataclass(frozen=True)
class ArrayAssign:
    array: str
    index: Expr
    value: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    declares: bool = False
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class If:
    cond: BExpr
    then: "Instr"
    orelse: Optional["Instr"] = None
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class While:
    cond: BExpr
    body: "Instr"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Assert:
    cond: BExpr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Enforce:
    cond: BExpr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Return:
    value: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Block:
    body: tuple
    pos: Optional[Pos] = _pos()


Instr = Union[ArrayAssign, Assign, If, While, Assert, Enforce, Return, Block]

INSTRUCTION_KINDS = (ArrayAssign, Assign, If, While, Assert, Enforce, Return, Block)


# -- declarations ----------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    length: Optional[Expr] = None  # None for scalars
    pos: Optional[Pos] = _pos()

    @property
    def is_array(self) -> bool:
        return self.length is not None


@dataclass(frozen=True)
class Contract:
    """Pre/postcondition pair of a callee, used in place of its body."""
    name: str
    params: tuple
    precondition: BExpr
    postcondition: BExpr
    modifies: tuple = ()
    returns: bool = True
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class ProgramAst:
    name: str
    params: tuple
    precondition: BExpr
    body: tuple
    postcondition: BExpr
    returns: bool = True
    modifies: tuple = ()
    contracts: tuple = ()
    header_line: int = field(default=1, compare=False)
    pos: Optional[Pos] = _pos()

    def param(self, name: str) -> Optional[Param]:
        for p in self.params:
            if p.name == name:
                return p
        return None

    @property
    def arrays(self) -> tuple:
        return tuple(p for p in self.params if p.is_array)

    @property
    def scalars(self) -> tuple:
        return tuple(p for p in self.params if not p.is_array)

    def contract(self) -> Contract:
        return Contract(self.name, self.params, self.precondition,
                        self.postcondition, self.modifies or assigned_arrays(self.body),
                        self.returns)

    def contract_for(self, name: str) -> Optional[Contract]:
        for c in self.contracts:
            if c.name == name:
                return c
        return None


def assigned_arrays(body) -> tuple:
    """Arrays written anywhere in ``body``, in first-write order."""
    seen: list = []

    def walk(i):
        if isinstance(i, ArrayAssign):
            if i.array not in seen:
                seen.append(i.array)
        elif isinstance(i, If):
            walk(i.then)
            if i.orelse is not None:
                walk(i.orelse)
        elif isinstance(i, While):
            walk(i.body)
        elif isinstance(i, Block):
            for j in i.body:
                walk(j)

    for instr in body:
        walk(instr)
    return tuple(seen)


def iter_nodes(node):
    """Yield ``node`` and every syntax node below it (pre-order)."""
    yield node
    if isinstance(node, (IntLit, Var, Sym, BoolLit, AllDiff)):
        return
    if isinstance(node, Index):
        yield from iter_nodes(node.index)
    elif isinstance(node, (BinOp, Rel, BoolOp)):
        yield from iter_nodes(node.left)
        yield from iter_nodes(node.right)
    elif isinstance(node, Call):
        for a in node.args:
            yield from iter_nodes(a)
    elif isinstance(node, Not):
        yield from iter_nodes(node.operand)
    elif isinstance(node, Quant):
        yield from iter_nodes(node.lo)
        yield from iter_nodes(node.hi)
        yield from iter_nodes(node.body)
    elif isinstance(node, ArrayAssign):
        yield from iter_nodes(node.index)
        yield from iter_nodes(node.value)
    elif isinstance(node, (Assign, Return)):
        yield from iter_nodes(node.value)
    elif isinstance(node, If):
        yield from iter_nodes(node.cond)
        yield from iter_nodes(node.then)
        if node.orelse is not None:
            yield from iter_nodes(node.orelse)
    elif isinstance(node, While):
        yield from iter_nodes(node.cond)
        yield from iter_nodes(node.body)
    elif isinstance(node, (Assert, Enforce)):
        yield from iter_nodes(node.cond)
    elif isinstance(node, Block):
        for i in node.body:
            yield from iter_nodes(i)
    elif isinstance(node, Param):
        if node.length is not None:
            yield from iter_nodes(node.length)
    elif isinstance(node, (ProgramAst, Contract)):
        for p in node.params:
            yield from iter_nodes(p)
        yield from iter_nodes(node.precondition)
        if isinstance(node, ProgramAst):
            for i in node.body:
                yield from iter_nodes(i)
        yield from iter_nodes(node.postcondition)
        if isinstance(node, ProgramAst):
            for c in node.contracts:
                yield from iter_nodes(c)
    else:
        raise TypeError(f"not a syntax node: {node!r}")


def const_value(e: Expr) -> Optional[int]:
    """Value of a closed literal expression, or None if it has free names."""
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, BinOp):
        a, b = const_value(e.left), const_value(e.right)
        if a is None or b is None:
            return None
        if e.op == "/":
            return None if b == 0 else tdiv(a, b)
        return apply_arith(e.op, a, b)
    return None


def tdiv(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def apply_arith(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return tdiv(a, b)
    raise ValueError(op)


def apply_rel(op: str, a: int, b: int) -> bool:
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    raise ValueError(op)
