import pytest
from hypothesis import given, strategies as st

from cpverify.ast import BinOp, Index, IntLit, Quant, Rel, Sym, Var
from cpverify.constraints import (
    CAnd, CBool, COr, CRel, Model, SBin, SCell, SConst, SVar, holds,
)
from cpverify.interp import Interpreter, _Env
from cpverify.parser import parse_program
from cpverify.renaming import (
    RenamingError, VersionMap, bump, expand_quantifiers, rename_bool, rename_expr,
)


def sigma0():
    return VersionMap.bottom(["l", "u", "v"], {"t": 8})


def test_bottom_maps_everything_to_zero():
    s = sigma0()
    assert all(v == 0 for _, v in s.items())
    assert s.var("u") == SVar("u", 0)
    assert s.arr("t").length == 8


def test_bump_is_functional():
    s = sigma0()
    s1 = bump(s, "u")
    assert s1["u"] == 1 and s["u"] == 0
    assert bump(s1, "u")["u"] == 2
    assert s1["l"] == 0


def test_bump_array_keeps_length():
    s = bump(sigma0(), "t")
    assert s.arr("t").version == 1 and s.arr("t").length == 8


def test_unknown_name():
    with pytest.raises(RenamingError):
        sigma0()["nope"]


def test_closed_arithmetic_folds():
    # the midpoint of the first loop iteration: (0 + 7) / 2 == 3
    assert rename_expr(sigma0(), BinOp("/", BinOp("+", IntLit(0), IntLit(7)), IntLit(2))) \
        == SConst(3)
    assert rename_expr(sigma0(), BinOp("/", IntLit(-3), IntLit(2))) == SConst(-1)


def test_division_by_zero_is_not_folded():
    e = rename_expr(sigma0(), BinOp("/", IntLit(1), IntLit(0)))
    assert isinstance(e, SBin)


def test_uses_current_versions():
    s = bump(bump(sigma0(), "u"), "t")
    e = rename_expr(s, Index("t", BinOp("+", Var("l"), Var("u"))))
    assert e == SCell(s.arr("t"), SBin("+", SVar("l", 0), SVar("u", 1)))


def test_env_takes_precedence():
    e = rename_expr(sigma0(), Var("u"), {"u": SConst(5)})
    assert e == SConst(5)


def test_unsubstituted_bound_rejected():
    with pytest.raises(RenamingError):
        rename_expr(sigma0(), Sym("N"))


def test_rename_bool_rejects_quantifier():
    q = Quant("forall", "i", IntLit(0), IntLit(2), Rel("<=", Var("i"), Var("u")))
    with pytest.raises(RenamingError):
        rename_bool(sigma0(), q)


def test_forall_expands_to_conjunction():
    # sortedness of a length-8 array
    body = Rel("<=", Index("t", Var("i")), Index("t", BinOp("+", Var("i"), IntLit(1))))
    c = expand_quantifiers(Quant("forall", "i", IntLit(0), IntLit(7), body), sigma0())
    t = sigma0().arr("t")
    assert isinstance(c, CAnd) and len(c.items) == 7
    assert c.items[0] == CRel("<=", SCell(t, SConst(0)), SCell(t, SConst(1)))


def test_empty_ranges():
    body = Rel("==", Var("i"), Var("i"))
    assert expand_quantifiers(Quant("forall", "i", IntLit(3), IntLit(3), body), sigma0()) \
        == CBool(True)
    assert expand_quantifiers(Quant("exists", "i", IntLit(3), IntLit(1), body), sigma0()) \
        == CBool(False)


def test_exists_expands_to_disjunction():
    body = Rel("==", Index("t", Var("i")), Var("v"))
    c = expand_quantifiers(Quant("exists", "i", IntLit(0), IntLit(8), body), sigma0())
    assert isinstance(c, COr) and len(c.items) == 8


def test_nested_range_uses_outer_variable():
    inner = Quant("forall", "j", Var("i"), IntLit(3), Rel("<=", Var("i"), Var("j")))
    c = expand_quantifiers(Quant("forall", "i", IntLit(0), IntLit(3), inner), sigma0())
    assert holds(c, Model())


def test_nonconstant_range_rejected():
    q = Quant("forall", "i", IntLit(0), Var("u"), Rel("<=", Var("i"), Var("u")))
    with pytest.raises(RenamingError):
        expand_quantifiers(q, sigma0())


SRC = """fn f(int a, int b, int[3] t) {
    a = a + b;
}
requires forall i in [0, 3): (t[i] <= a || exists j in [0, i): t[j] == b * i)
"""


@given(st.integers(-8, 7), st.integers(-8, 7), st.lists(st.integers(-8, 7), min_size=3,
                                                          max_size=3))
def test_expansion_agrees_with_concrete_evaluation(a, b, t):
    ast = parse_program(SRC)
    sigma = VersionMap.bottom(["a", "b"], {"t": 3})
    c = expand_quantifiers(ast.precondition, sigma)
    m = Model({("a", 0): a, ("b", 0): b}, {("t", 0): t})
    it = Interpreter(ast, bits=4)
    assert holds(c, m) == it.truth(ast.precondition, _Env({"a": a, "b": b}, {"t": t}), True)
