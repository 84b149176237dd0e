"""Recursive-descent parser, name resolution and pretty printer for ``.cpv``.

The concrete grammar is documented in ``docs/grammar.md``.
"""
from __future__ import annotations

import re
from dataclasses import replace
from typing import Mapping, Optional

from .ast import (
    AllDiff, ArrayAssign, Assert, Assign, BinOp, Block, BoolLit, BoolOp, Call,
    Contract, Enforce, If, Index, IntLit, Not, Param, Pos, ProgramAst, Quant,
    Rel, Return, Sym, Var, While, const_value,
)


class FrontendError(Exception):
    """Base class for every error raised while reading a source file."""

    def __init__(self, message: str, pos: Optional[Pos] = None):
        self.message = message
        self.pos = pos
        where = f"{pos.line}:{pos.col}: " if pos else ""
        super().__init__(where + message)


class CpvSyntaxError(FrontendError):
    pass


class CpvTypeError(FrontendError):
    pass


class BindingError(FrontendError):
    pass


KEYWORDS = {
    "fn", "extern", "int", "if", "else", "while", "assert", "enforce",
    "return", "requires", "ensures", "modifies", "returns", "true", "false",
    "forall", "exists", "in", "alldifferent",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==>|==|!=|<=|>=|&&|\|\||->|[-+*/<>=!()\[\]{},;:.])
""", re.VERBOSE)


class Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: Pos):
        self.kind = kind
        self.text = text
        self.pos = pos

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.pos})"


def tokenize(source: str) -> list:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise CpvSyntaxError(f"unexpected character {source[i]!r}",
                                 Pos(line, i - line_start + 1))
        kind = m.lastgroup
        text = m.group()
        pos = Pos(line, i - line_start + 1)
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "id":
            tokens.append(Token("kw" if text in KEYWORDS else "id", text, pos))
        elif kind in ("num", "op"):
            tokens.append(Token(kind, text, pos))
        i = m.end()
    tokens.append(Token("eof", "", Pos(line, i - line_start + 1)))
    return tokens


_REL_OPS = ("<", "<=", ">", ">=", "==", "!=")


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "kw")

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            got = self.tok.text or "end of input"
            raise CpvSyntaxError(f"expected {text!r}, found {got!r}", self.tok.pos)
        return t

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "id":
            got = t.text or "end of input"
            raise CpvSyntaxError(f"expected identifier, found {got!r}", t.pos)
        self.i += 1
        return t

    # -- declarations
    def file(self):
        main = None
        externs = []
        while self.tok.kind != "eof":
            start = self.tok.pos
            pre, post, mods = [], [], []
            self._clauses(pre, post, mods)
            extern = self.accept("extern") is not None
            fn_tok = self.expect("fn")
            name = self.ident()
            self.expect("(")
            params = []
            if not self.at(")"):
                params.append(self._param())
                while self.accept(","):
                    params.append(self._param())
            self.expect(")")
            returns = bool(self.accept("->") or self.accept("returns"))
            if returns:
                self.expect("int")
            if extern:
                # the first semicolon ends the declaration
                if not self._clauses(pre, post, mods, stop_at_semicolon=True):
                    self.expect(";")
                externs.append(Contract(name.text, tuple(params), _conj(pre),
                                        _conj(post), tuple(mods), returns, start))
                continue
            if main is not None:
                raise CpvSyntaxError("only one function with a body is allowed per file",
                                     fn_tok.pos)
            self._clauses(pre, post, mods)
            body = self._block()
            self._clauses(pre, post, mods)
            main = (name, tuple(params), pre, post, tuple(mods), returns, body, fn_tok, start)
        if main is None:
            raise CpvSyntaxError("no function definition found", self.tok.pos)
        name, params, pre, post, mods, returns, body, fn_tok, start = main
        has_return = any(isinstance(n, Return) for i in body.body for n in _walk_instr(i))
        return ProgramAst(name.text, params, _conj(pre), body.body, _conj(post),
                          returns or has_return, mods, tuple(externs),
                          header_line=fn_tok.pos.line, pos=start)

    def _clauses(self, pre, post, mods, stop_at_semicolon=False) -> bool:
        """Parse contract clauses; True if one was closed by a semicolon."""
        while True:
            if self.accept("requires"):
                pre.append(self.expr())
            elif self.accept("ensures"):
                post.append(self.expr())
            elif self.accept("modifies"):
                mods.append(self.ident().text)
                while self.accept(","):
                    mods.append(self.ident().text)
            else:
                return False
            if self.accept(";") and stop_at_semicolon:
                return True

    def _param(self) -> Param:
        t = self.expect("int")
        length = None
        if self.accept("["):
            length = self.expr()
            self.expect("]")
        name = self.ident()
        return Param(name.text, length, t.pos)

    # -- statements
    def _block(self) -> Block:
        t = self.expect("{")
        body = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise CpvSyntaxError("unclosed block", t.pos)
            body.append(self.stmt())
        self.expect("}")
        return Block(tuple(body), t.pos)

    def stmt(self):
        t = self.tok
        if self.at("{"):
            return self._block()
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.stmt()
            orelse = self.stmt() if self.accept("else") else None
            return If(cond, then, orelse, t.pos)
        if self.accept("while"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(cond, self.stmt(), t.pos)
        if self.accept("assert"):
            cond = self.expr()
            self.expect(";")
            return Assert(cond, t.pos)
        if self.accept("enforce"):
            cond = self.expr()
            self.expect(";")
            return Enforce(cond, t.pos)
        if self.accept("return"):
            value = self.expr()
            self.expect(";")
            return Return(value, t.pos)
        if self.accept("int"):
            name = self.ident()
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return Assign(name.text, value, True, t.pos)
        if t.kind == "id":
            name = self.ident()
            if self.accept("["):
                index = self.expr()
                self.expect("]")
                self.expect("=")
                value = self.expr()
                self.expect(";")
                return ArrayAssign(name.text, index, value, t.pos)
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return Assign(name.text, value, False, t.pos)
        got = t.text or "end of input"
        raise CpvSyntaxError(f"expected a statement, found {got!r}", t.pos)

    # -- expressions (one precedence ladder; types are checked afterwards)
    def expr(self):
        if self.at("forall") or self.at("exists"):
            t = self.tok
            self.i += 1
            var = self.ident()
            self.expect("in")
            self.expect("[")
            lo = self.expr()
            self.expect(",")
            hi = self.expr()
            self.expect(")")
            self.expect(":")
            return Quant(t.text, var.text, lo, hi, self.expr(), t.pos)
        return self._implies()

    def _implies(self):
        left = self._or()
        t = self.accept("==>")
        if t:
            right = self.expr()
            return BoolOp("==>", left, right, t.pos)
        return left

    def _or(self):
        left = self._and()
        while True:
            t = self.accept("||")
            if not t:
                return left
            left = BoolOp("||", left, self._and_operand_or_quant(self._and), t.pos)

    def _and(self):
        left = self._not()
        while True:
            t = self.accept("&&")
            if not t:
                return left
            left = BoolOp("&&", left, self._and_operand_or_quant(self._not), t.pos)

    def _and_operand_or_quant(self, sub):
        if self.at("forall") or self.at("exists"):
            return self.expr()
        return sub()

    def _not(self):
        t = self.accept("!")
        if t:
            if self.at("forall") or self.at("exists"):
                return Not(self.expr(), t.pos)
            return Not(self._not(), t.pos)
        return self._rel()

    def _rel(self):
        left = self._add()
        t = self.tok
        if t.kind == "op" and t.text in _REL_OPS:
            self.i += 1
            right = self._add()
            return Rel(t.text, left, right, t.pos)
        return left

    def _add(self):
        left = self._mul()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            t = self.tok
            self.i += 1
            left = BinOp(t.text, left, self._mul(), t.pos)
        return left

    def _mul(self):
        left = self._unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            t = self.tok
            self.i += 1
            left = BinOp(t.text, left, self._unary(), t.pos)
        return left

    def _unary(self):
        t = self.accept("-")
        if t:
            if self.tok.kind == "num":
                n = self.tok
                self.i += 1
                return IntLit(-int(n.text), t.pos)
            return BinOp("-", IntLit(0, t.pos), self._unary(), t.pos)
        return self._primary()

    def _primary(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return IntLit(int(t.text), t.pos)
        if self.accept("true"):
            return BoolLit(True, t.pos)
        if self.accept("false"):
            return BoolLit(False, t.pos)
        if self.accept("alldifferent"):
            self.expect("(")
            name = self.ident()
            self.expect(")")
            return AllDiff(name.text, t.pos)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "id":
            self.i += 1
            if self.accept("["):
                index = self.expr()
                self.expect("]")
                return Index(t.text, index, t.pos)
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return Call(t.text, tuple(args), t.pos)
            if self.at(".") and self.peek().text == "length":
                self.i += 2
                return _Length(t.text, t.pos)
            return Var(t.text, t.pos)
        got = t.text or "end of input"
        raise CpvSyntaxError(f"expected an expression, found {got!r}", t.pos)


class _Length:
    """``a.length`` before resolution; replaced by the declared bound."""

    def __init__(self, array: str, pos: Pos):
        self.array = array
        self.pos = pos


def _conj(items):
    if not items:
        return BoolLit(True)
    out = items[0]
    for b in items[1:]:
        out = BoolOp("&&", out, b, b.pos)
    return out


def _walk_instr(i):
    yield i
    if isinstance(i, If):
        yield from _walk_instr(i.then)
        if i.orelse is not None:
            yield from _walk_instr(i.orelse)
    elif isinstance(i, While):
        yield from _walk_instr(i.body)
    elif isinstance(i, Block):
        for j in i.body:
            yield from _walk_instr(j)


# -- name resolution and type checking -------------------------------------

_INT, _BOOL, _ARRAY = "int", "bool", "array"


class _Scope:
    def __init__(self, params, symbols, contracts, returns):
        self.arrays = {p.name: p for p in params if p.is_array}
        self.scalars = {p.name for p in params if not p.is_array}
        self.symbols = set(symbols)
        self.contracts = contracts
        self.returns = returns
        self.locals: set = set()
        self.bound: list = []
        self.allow_result = False
        self.allow_calls = False

    def is_scalar(self, name):
        return name in self.scalars or name in self.locals or name in self.bound \
            or (name == "result" and self.allow_result)

    def known(self, name):
        return self.is_scalar(name) or name in self.arrays or name in self.symbols


def _symbols_of(params):
    out = []
    for p in params:
        if p.length is not None:
            for n in _names(p.length):
                if n not in out:
                    out.append(n)
    return out


def _names(e):
    if isinstance(e, (Var, Sym)):
        yield e.name
    elif isinstance(e, BinOp):
        yield from _names(e.left)
        yield from _names(e.right)


def _resolve_length(e):
    if isinstance(e, Var):
        return Sym(e.name, e.pos)
    if isinstance(e, BinOp):
        return BinOp(e.op, _resolve_length(e.left), _resolve_length(e.right), e.pos)
    if isinstance(e, (IntLit, Sym)):
        return e
    raise CpvTypeError("array length must be an integer or a symbolic bound", e.pos)


def _params(params, owner):
    seen = set()
    out = []
    for p in params:
        if p.name in seen:
            raise CpvTypeError(f"duplicate parameter {p.name!r} in {owner}", p.pos)
        if p.name == "result":
            raise CpvTypeError("'result' is reserved", p.pos)
        seen.add(p.name)
        out.append(p if p.length is None else replace(p, length=_resolve_length(p.length)))
    syms = _symbols_of(params)
    for s in syms:
        if s in seen:
            raise CpvTypeError(f"bound {s!r} clashes with a parameter name", None)
    return tuple(out), syms


def _expr(e, sc: _Scope, want: str):
    kind, node = _check(e, sc)
    if kind != want:
        what = {"int": "an integer", "bool": "a boolean", "array": "an array"}
        raise CpvTypeError(f"expected {what[want]} expression, found {what[kind]}",
                           getattr(e, "pos", None))
    return node


def _check(e, sc: _Scope):
    if isinstance(e, IntLit):
        return _INT, e
    if isinstance(e, BoolLit):
        return _BOOL, e
    if isinstance(e, _Length):
        p = sc.arrays.get(e.array)
        if p is None:
            raise CpvTypeError(f"{e.array!r} is not an array", e.pos)
        return _INT, _relocate(p.length, e.pos)
    if isinstance(e, Sym):  # already resolved, e.g. a contract taken from another file
        if e.name not in sc.symbols:
            raise CpvTypeError(f"undeclared bound {e.name!r}", e.pos)
        return _INT, e
    if isinstance(e, Var):
        if e.name in sc.bound or sc.is_scalar(e.name):
            return _INT, e
        if e.name in sc.symbols:
            return _INT, Sym(e.name, e.pos)
        if e.name in sc.arrays:
            return _ARRAY, e
        if e.name == "result":
            raise CpvTypeError("'result' may only appear in a postcondition of a "
                               "function that returns a value", e.pos)
        raise CpvTypeError(f"undeclared identifier {e.name!r}", e.pos)
    if isinstance(e, Index):
        if e.array not in sc.arrays:
            if sc.known(e.array):
                raise CpvTypeError(f"{e.array!r} is a scalar, not an array", e.pos)
            raise CpvTypeError(f"undeclared identifier {e.array!r}", e.pos)
        return _INT, Index(e.array, _expr(e.index, sc, _INT), e.pos)
    if isinstance(e, BinOp):
        return _INT, BinOp(e.op, _expr(e.left, sc, _INT), _expr(e.right, sc, _INT), e.pos)
    if isinstance(e, Rel):
        return _BOOL, Rel(e.op, _expr(e.left, sc, _INT), _expr(e.right, sc, _INT), e.pos)
    if isinstance(e, Not):
        return _BOOL, Not(_expr(e.operand, sc, _BOOL), e.pos)
    if isinstance(e, BoolOp):
        return _BOOL, BoolOp(e.op, _expr(e.left, sc, _BOOL), _expr(e.right, sc, _BOOL), e.pos)
    if isinstance(e, AllDiff):
        if e.array not in sc.arrays:
            raise CpvTypeError(f"alldifferent expects an array, got {e.array!r}", e.pos)
        return _BOOL, e
    if isinstance(e, Quant):
        if sc.known(e.var) or e.var in sc.bound or e.var == "result":
            raise CpvTypeError(f"quantified variable {e.var!r} shadows another name", e.pos)
        lo = _expr(e.lo, sc, _INT)
        hi = _expr(e.hi, sc, _INT)
        sc.bound.append(e.var)
        try:
            body = _expr(e.body, sc, _BOOL)
        finally:
            sc.bound.pop()
        return _BOOL, Quant(e.kind, e.var, lo, hi, body, e.pos)
    if isinstance(e, Call):
        if not sc.allow_calls:
            raise CpvTypeError("calls may only appear as the right-hand side of an "
                               "assignment", e.pos)
        c = sc.contracts.get(e.name)
        if c is None:
            raise CpvTypeError(f"call to {e.name!r} without a contract declaration", e.pos)
        if len(e.args) != len(c.params):
            raise CpvTypeError(f"{e.name!r} expects {len(c.params)} arguments, "
                               f"got {len(e.args)}", e.pos)
        sc.allow_calls = False
        try:
            args = []
            for formal, a in zip(c.params, e.args):
                if formal.is_array:
                    if not (isinstance(a, Var) and a.name in sc.arrays):
                        raise CpvTypeError(f"argument {formal.name!r} of {e.name!r} must "
                                           "be an array parameter", getattr(a, "pos", e.pos))
                    args.append(a)
                else:
                    args.append(_expr(a, sc, _INT))
        finally:
            sc.allow_calls = True
        if not c.returns:
            raise CpvTypeError(f"{e.name!r} does not return a value", e.pos)
        return _INT, Call(e.name, tuple(args), e.pos)
    raise CpvTypeError(f"unsupported expression {e!r}", getattr(e, "pos", None))


def _relocate(e, pos):
    if isinstance(e, IntLit):
        return IntLit(e.value, pos)
    if isinstance(e, Sym):
        return Sym(e.name, pos)
    if isinstance(e, BinOp):
        return BinOp(e.op, _relocate(e.left, pos), _relocate(e.right, pos), pos)
    return e


def _check_instr(i, sc: _Scope, declared_anywhere: set):
    if isinstance(i, Block):
        return Block(tuple(_check_instr(j, sc, declared_anywhere) for j in i.body), i.pos)
    if isinstance(i, Assign):
        if i.target in sc.arrays:
            raise CpvTypeError(f"cannot assign to array {i.target!r} as a scalar", i.pos)
        if i.target in sc.symbols:
            raise CpvTypeError(f"cannot assign to bound {i.target!r}", i.pos)
        if i.target == "result":
            raise CpvTypeError("'result' is reserved; use return", i.pos)
        sc.allow_calls = isinstance(i.value, Call)
        try:
            value = _expr(i.value, sc, _INT)
        finally:
            sc.allow_calls = False
        if i.declares:
            if i.target in sc.scalars or i.target in declared_anywhere:
                raise CpvTypeError(f"redeclaration of {i.target!r}", i.pos)
            declared_anywhere.add(i.target)
            sc.locals.add(i.target)
        elif not sc.is_scalar(i.target):
            raise CpvTypeError(f"assignment to undeclared variable {i.target!r}", i.pos)
        return Assign(i.target, value, i.declares, i.pos)
    if isinstance(i, ArrayAssign):
        if i.array not in sc.arrays:
            if sc.known(i.array):
                raise CpvTypeError(f"{i.array!r} is a scalar, not an array", i.pos)
            raise CpvTypeError(f"undeclared identifier {i.array!r}", i.pos)
        return ArrayAssign(i.array, _expr(i.index, sc, _INT), _expr(i.value, sc, _INT), i.pos)
    if isinstance(i, If):
        cond = _expr(i.cond, sc, _BOOL)
        then = _check_instr(i.then, sc, declared_anywhere)
        orelse = None if i.orelse is None else _check_instr(i.orelse, sc, declared_anywhere)
        return If(cond, then, orelse, i.pos)
    if isinstance(i, While):
        return While(_expr(i.cond, sc, _BOOL), _check_instr(i.body, sc, declared_anywhere), i.pos)
    if isinstance(i, Assert):
        return Assert(_expr(i.cond, sc, _BOOL), i.pos)
    if isinstance(i, Enforce):
        return Enforce(_expr(i.cond, sc, _BOOL), i.pos)
    if isinstance(i, Return):
        return Return(_expr(i.value, sc, _INT), i.pos)
    raise CpvTypeError(f"unsupported statement {i!r}", getattr(i, "pos", None))


def _check_contract(c: Contract) -> Contract:
    params, syms = _params(c.params, c.name)
    sc = _Scope(params, syms, {}, c.returns)
    pre = _expr(c.precondition, sc, _BOOL)
    sc.allow_result = c.returns
    post = _expr(c.postcondition, sc, _BOOL)
    for m in c.modifies:
        if m not in sc.arrays:
            raise CpvTypeError(f"modifies clause names {m!r}, which is not an array "
                               "parameter", c.pos)
    return Contract(c.name, params, pre, post, c.modifies, c.returns, c.pos)


def _check_program(p: ProgramAst) -> ProgramAst:
    contracts = {}
    for c in p.contracts:
        if c.name in contracts or c.name == p.name:
            raise CpvTypeError(f"duplicate declaration of {c.name!r}", c.pos)
        contracts[c.name] = _check_contract(c)
    params, syms = _params(p.params, p.name)
    sc = _Scope(params, syms, contracts, p.returns)
    pre = _expr(p.precondition, sc, _BOOL)
    declared: set = set()
    body = tuple(_check_instr(i, sc, declared) for i in p.body)
    sc.allow_result = p.returns
    sc.locals = set()  # postconditions speak about parameters and result only
    post = _expr(p.postcondition, sc, _BOOL)
    for m in p.modifies:
        if m not in sc.arrays:
            raise CpvTypeError(f"modifies clause names {m!r}, which is not an array "
                               "parameter", p.pos)
    return ProgramAst(p.name, params, pre, body, post, p.returns, p.modifies,
                      tuple(contracts.values()), header_line=p.header_line, pos=p.pos)


def parse_program(source: str, contracts=()) -> ProgramAst:
    """Parse and type-check one ``.cpv`` source text.

    ``contracts`` supplies declarations for callees the source does not
    declare itself; declarations in the source take precedence.
    """
    p = _Parser(source).file()
    own = {c.name for c in p.contracts}
    extra = tuple(c for c in contracts if c.name not in own and c.name != p.name)
    if extra:
        p = replace(p, contracts=p.contracts + extra)
    return _check_program(p)


def parse_file(path, contracts=()) -> ProgramAst:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read(), contracts)


# -- symbolic bound substitution ------------------------------------------

def bound_names(ast: ProgramAst) -> list:
    """Names of the symbolic bounds a program needs bound, sorted."""
    from .ast import iter_nodes
    parts = [p.length for p in ast.params if p.length is not None]
    parts += [ast.precondition, ast.postcondition, *ast.body]
    return sorted({n.name for part in parts for n in iter_nodes(part) if isinstance(n, Sym)})


def _subst(node, b: Mapping[str, int]):
    """Replace symbolic bounds; fold lengths and quantifier ranges."""
    if isinstance(node, Sym):
        if node.name not in b:
            raise BindingError(f"missing binding for bound {node.name!r}", node.pos)
        return IntLit(b[node.name], node.pos)
    if isinstance(node, (IntLit, Var, BoolLit, AllDiff)):
        return node
    if isinstance(node, Index):
        return Index(node.array, _subst(node.index, b), node.pos)
    if isinstance(node, BinOp):
        return BinOp(node.op, _subst(node.left, b), _subst(node.right, b), node.pos)
    if isinstance(node, Call):
        return Call(node.name, tuple(_subst(a, b) for a in node.args), node.pos)
    if isinstance(node, Rel):
        return Rel(node.op, _subst(node.left, b), _subst(node.right, b), node.pos)
    if isinstance(node, Not):
        return Not(_subst(node.operand, b), node.pos)
    if isinstance(node, BoolOp):
        return BoolOp(node.op, _subst(node.left, b), _subst(node.right, b), node.pos)
    if isinstance(node, Quant):
        lo, hi = _fold(_subst(node.lo, b)), _fold(_subst(node.hi, b))
        return Quant(node.kind, node.var, lo, hi, _subst(node.body, b), node.pos)
    if isinstance(node, ArrayAssign):
        return ArrayAssign(node.array, _subst(node.index, b), _subst(node.value, b), node.pos)
    if isinstance(node, Assign):
        return Assign(node.target, _subst(node.value, b), node.declares, node.pos)
    if isinstance(node, If):
        orelse = None if node.orelse is None else _subst(node.orelse, b)
        return If(_subst(node.cond, b), _subst(node.then, b), orelse, node.pos)
    if isinstance(node, While):
        return While(_subst(node.cond, b), _subst(node.body, b), node.pos)
    if isinstance(node, Assert):
        return Assert(_subst(node.cond, b), node.pos)
    if isinstance(node, Enforce):
        return Enforce(_subst(node.cond, b), node.pos)
    if isinstance(node, Return):
        return Return(_subst(node.value, b), node.pos)
    if isinstance(node, Block):
        return Block(tuple(_subst(i, b) for i in node.body), node.pos)
    raise TypeError(node)


def _fold(e):
    v = const_value(e)
    return e if v is None or isinstance(e, IntLit) else IntLit(v, e.pos)


def substitute_params(ast: ProgramAst, bindings: Mapping[str, int]) -> ProgramAst:
    """Make every array length and quantifier range of ``ast`` concrete.

    Extern contracts keep their own bounds: those are unified with the actual
    array arguments at each call site.
    """
    params = []
    for p in ast.params:
        if p.length is None:
            params.append(p)
            continue
        length = _fold(_subst(p.length, bindings))
        if not isinstance(length, IntLit):
            raise BindingError(f"length of {p.name!r} is not constant", p.pos)
        if length.value <= 0:
            raise BindingError(f"length of {p.name!r} must be positive, got {length.value}",
                               p.pos)
        params.append(Param(p.name, length, p.pos))
    return ProgramAst(ast.name, tuple(params), _subst(ast.precondition, bindings),
                      tuple(_subst(i, bindings) for i in ast.body),
                      _subst(ast.postcondition, bindings), ast.returns, ast.modifies,
                      ast.contracts, header_line=ast.header_line, pos=ast.pos)


def array_length(ast: ProgramAst, name: str) -> int:
    p = ast.param(name)
    if p is None or p.length is None or not isinstance(p.length, IntLit):
        raise BindingError(f"array {name!r} has no concrete length")
    return p.length.value


# -- pretty printing --------------------------------------------------------

def pretty_expr(e) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, (Var, Sym)):
        return e.name
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Index):
        return f"{e.array}[{pretty_expr(e.index)}]"
    if isinstance(e, (BinOp, Rel, BoolOp)):
        return f"({pretty_expr(e.left)} {e.op} {pretty_expr(e.right)})"
    if isinstance(e, Not):
        return f"!{pretty_expr(e.operand)}"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(pretty_expr(a) for a in e.args)})"
    if isinstance(e, AllDiff):
        return f"alldifferent({e.array})"
    if isinstance(e, Quant):
        return (f"({e.kind} {e.var} in [{pretty_expr(e.lo)}, {pretty_expr(e.hi)}): "
                f"{pretty_expr(e.body)})")
    raise TypeError(e)


def _pretty_instr(i, indent: int, out: list):
    pad = "    " * indent
    if isinstance(i, Block):
        out.append(pad + "{")
        for j in i.body:
            _pretty_instr(j, indent + 1, out)
        out.append(pad + "}")
    elif isinstance(i, Assign):
        decl = "int " if i.declares else ""
        out.append(f"{pad}{decl}{i.target} = {pretty_expr(i.value)};")
    elif isinstance(i, ArrayAssign):
        out.append(f"{pad}{i.array}[{pretty_expr(i.index)}] = {pretty_expr(i.value)};")
    elif isinstance(i, If):
        out.append(f"{pad}if ({pretty_expr(i.cond)})")
        _pretty_instr(i.then, indent + 1, out)
        if i.orelse is not None:
            out.append(pad + "else")
            _pretty_instr(i.orelse, indent + 1, out)
    elif isinstance(i, While):
        out.append(f"{pad}while ({pretty_expr(i.cond)})")
        _pretty_instr(i.body, indent + 1, out)
    elif isinstance(i, Assert):
        out.append(f"{pad}assert {pretty_expr(i.cond)};")
    elif isinstance(i, Enforce):
        out.append(f"{pad}enforce {pretty_expr(i.cond)};")
    elif isinstance(i, Return):
        out.append(f"{pad}return {pretty_expr(i.value)};")
    else:
        raise TypeError(i)


def _pretty_params(params) -> str:
    parts = []
    for p in params:
        if p.length is None:
            parts.append(f"int {p.name}")
        else:
            parts.append(f"int[{pretty_expr(p.length)}] {p.name}")
    return ", ".join(parts)


def pretty_print(ast: ProgramAst) -> str:
    out = []
    for c in ast.contracts:
        ret = " -> int" if c.returns else ""
        out.append(f"extern fn {c.name}({_pretty_params(c.params)}){ret}")
        out.append(f"    requires {pretty_expr(c.precondition)}")
        out.append(f"    ensures {pretty_expr(c.postcondition)}")
        if c.modifies:
            out.append(f"    modifies {', '.join(c.modifies)}")
        out.append(";")
    out.append(f"requires {pretty_expr(ast.precondition)}")
    out.append(f"ensures {pretty_expr(ast.postcondition)}")
    if ast.modifies:
        out.append(f"modifies {', '.join(ast.modifies)}")
    ret = " -> int" if ast.returns else ""
    out.append(f"fn {ast.name}({_pretty_params(ast.params)}){ret} {{")
    for i in ast.body:
        _pretty_instr(i, 1, out)
    out.append("}")
    return "\n".join(out) + "\n"


def contract_bindings(contract: Contract, lengths) -> dict:
    """Bind the symbolic bounds of ``contract`` from actual array lengths.

    ``lengths`` lists, per parameter, the actual length (``None`` for
    scalars). Only lengths that are a bare bound or a literal are unified.
    """
    out: dict = {}
    for p, n in zip(contract.params, lengths):
        if p.length is None:
            continue
        if isinstance(p.length, Sym):
            prev = out.setdefault(p.length.name, n)
            if prev != n:
                raise BindingError(f"{contract.name}: bound {p.length.name!r} is both "
                                   f"{prev} and {n}", p.pos)
        else:
            v = const_value(_subst(p.length, out)) if not _has_sym(p.length) else None
            if v is not None and v != n:
                raise BindingError(f"{contract.name}: {p.name!r} needs length {v}, got {n}",
                                   p.pos)
    return out


def _has_sym(e) -> bool:
    from .ast import iter_nodes
    return any(isinstance(n, Sym) for n in iter_nodes(e))


def instantiate_contract(contract: Contract, bindings) -> Contract:
    """``contract`` with its symbolic bounds replaced by integers."""
    return Contract(contract.name, contract.params,
                    _subst(contract.precondition, bindings),
                    _subst(contract.postcondition, bindings),
                    contract.modifies, contract.returns, contract.pos)
