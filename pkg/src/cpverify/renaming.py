"""Version maps and the renaming of program expressions into constraints."""
from __future__ import annotations

from typing import Mapping, Optional

from .ast import (
    AllDiff, BinOp, BoolLit, BoolOp, Index, IntLit, Not, Quant, Rel, Sym, Var,
    apply_arith, const_value,
)
from .constraints import (
    CAllDiff, CAnd, CBool, CImplies, CNot, COr, CRel, SArr, SBin, SCell, SConst, SVar,
)


class RenamingError(Exception):
    pass


class VersionMap:
    """Immutable map from identifiers to version numbers.

    Arrays also remember their (concrete) length so that renamed array
    references are self-describing.
    """

    __slots__ = ("_versions", "_lengths")

    def __init__(self, versions: Mapping[str, int], lengths: Mapping[str, int]):
        self._versions = dict(versions)
        self._lengths = dict(lengths)

    @classmethod
    def bottom(cls, scalars=(), arrays: Optional[Mapping[str, int]] = None) -> "VersionMap":
        arrays = dict(arrays or {})
        versions = {name: 0 for name in scalars}
        versions.update({name: 0 for name in arrays})
        return cls(versions, arrays)

    def __getitem__(self, name: str) -> int:
        try:
            return self._versions[name]
        except KeyError:
            raise RenamingError(f"unknown identifier {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._versions

    def __iter__(self):
        return iter(self._versions)

    def __eq__(self, other):
        return isinstance(other, VersionMap) and self._versions == other._versions

    def __hash__(self):
        return hash(tuple(sorted(self._versions.items())))

    def __repr__(self):
        inner = ", ".join(f"{k}:{v}" for k, v in sorted(self._versions.items()))
        return f"VersionMap({inner})"

    def is_array(self, name: str) -> bool:
        return name in self._lengths

    def length(self, name: str) -> int:
        return self._lengths[name]

    def var(self, name: str) -> SVar:
        if name in self._lengths:
            raise RenamingError(f"{name!r} is an array")
        return SVar(name, self[name])

    def arr(self, name: str) -> SArr:
        if name not in self._lengths:
            raise RenamingError(f"{name!r} is not an array")
        return SArr(name, self[name], self._lengths[name])

    def with_scalar(self, name: str) -> "VersionMap":
        if name in self._versions:
            return self
        v = dict(self._versions)
        v[name] = 0
        return VersionMap(v, self._lengths)

    def items(self):
        return self._versions.items()


def bump(sigma: VersionMap, x: str) -> VersionMap:
    """A copy of ``sigma`` in which ``x`` maps to its next version."""
    current = sigma[x]
    versions = dict(sigma._versions)
    versions[x] = current + 1
    return VersionMap(versions, sigma._lengths)


def _fold(op, a, b):
    if isinstance(a, SConst) and isinstance(b, SConst):
        if op == "/" and b.value == 0:
            return SBin(op, a, b)
        return SConst(apply_arith(op, a.value, b.value))
    return SBin(op, a, b)


def rename_expr(sigma: VersionMap, e, env: Optional[Mapping] = None):
    """Rename an integer expression; closed arithmetic is folded.

    ``env`` maps names to ready-made solver terms (quantified variables and
    callee formals) and takes precedence over ``sigma``.
    """
    if isinstance(e, IntLit):
        return SConst(e.value)
    if isinstance(e, Var):
        if env is not None and e.name in env:
            t = env[e.name]
            if isinstance(t, SArr):
                raise RenamingError(f"{e.name!r} is an array")
            return t
        return sigma.var(e.name)
    if isinstance(e, Sym):
        raise RenamingError(f"symbolic bound {e.name!r} was not substituted")
    if isinstance(e, Index):
        if env is not None and e.array in env:
            a = env[e.array]
            if not isinstance(a, SArr):
                raise RenamingError(f"{e.array!r} is not an array")
        else:
            a = sigma.arr(e.array)
        return SCell(a, rename_expr(sigma, e.index, env))
    if isinstance(e, BinOp):
        return _fold(e.op, rename_expr(sigma, e.left, env), rename_expr(sigma, e.right, env))
    raise RenamingError(f"cannot rename {type(e).__name__}")


def rename_bool(sigma: VersionMap, b, env: Optional[Mapping] = None):
    """Structure-preserving renaming of a quantifier-free boolean expression."""
    if isinstance(b, BoolLit):
        return CBool(b.value)
    if isinstance(b, Rel):
        return CRel(b.op, rename_expr(sigma, b.left, env), rename_expr(sigma, b.right, env))
    if isinstance(b, Not):
        return CNot(rename_bool(sigma, b.operand, env))
    if isinstance(b, BoolOp):
        left, right = rename_bool(sigma, b.left, env), rename_bool(sigma, b.right, env)
        if b.op == "&&":
            return CAnd((left, right))
        if b.op == "||":
            return COr((left, right))
        return CImplies(left, right)
    if isinstance(b, AllDiff):
        if env is not None and b.array in env:
            return CAllDiff(env[b.array])
        return CAllDiff(sigma.arr(b.array))
    if isinstance(b, Quant):
        raise RenamingError("quantifiers must be expanded before renaming")
    raise RenamingError(f"cannot rename {type(b).__name__}")


def expand_quantifiers(s, sigma: VersionMap, env: Optional[Mapping] = None):
    """Expand bounded quantifiers into finite connectives and rename the result.

    ``forall`` becomes a conjunction, ``exists`` a disjunction; an empty
    range gives ``true`` and ``false`` respectively.
    """
    if isinstance(s, Quant):
        lo, hi = _concrete(s.lo, sigma, env), _concrete(s.hi, sigma, env)
        parts = []
        for k in range(lo, hi):
            inner = dict(env or {})
            inner[s.var] = SConst(k)
            parts.append(expand_quantifiers(s.body, sigma, inner))
        if s.kind == "forall":
            return CAnd(tuple(parts)) if parts else CBool(True)
        return COr(tuple(parts)) if parts else CBool(False)
    if isinstance(s, Not):
        return CNot(expand_quantifiers(s.operand, sigma, env))
    if isinstance(s, BoolOp):
        left = expand_quantifiers(s.left, sigma, env)
        right = expand_quantifiers(s.right, sigma, env)
        if s.op == "&&":
            return CAnd((left, right))
        if s.op == "||":
            return COr((left, right))
        return CImplies(left, right)
    return rename_bool(sigma, s, env)


def _concrete(e, sigma, env) -> int:
    v = const_value(e)
    if v is not None:
        return v
    # A range may mention enclosing quantified variables or constant formals.
    if env is not None:
        try:
            r = rename_expr(sigma, e, {k: t for k, t in env.items()})
        except Exception:
            r = None
        if isinstance(r, SConst):
            return r.value
    raise RenamingError("quantifier range is not concrete")
