import pytest
from hypothesis import given, settings, strategies as st

from cpverify import programs
from cpverify.ast import (
    Assign, BinOp, Call, If, Index, IntLit, Quant, Return, Sym, Var, While, iter_nodes,
)
from cpverify.parser import (
    BindingError, CpvSyntaxError, CpvTypeError, array_length, bound_names, contract_bindings,
    instantiate_contract, parse_program, pretty_print, substitute_params,
)
from cpverify.randprog import random_program


def test_binary_search_shape():
    ast = programs.load("binary_search")
    nodes = [n for i in ast.body for n in iter_nodes(i)]
    assert sum(isinstance(n, While) for n in nodes) == 1
    assert sum(isinstance(n, If) for n in nodes) == 2
    assert sum(isinstance(n, Return) for n in nodes) == 2
    assert ast.returns
    assert [p.name for p in ast.params] == ["t", "v"]
    assert ast.param("t").is_array and not ast.param("v").is_array


def test_length_becomes_declared_bound():
    ast = programs.load("binary_search")
    u = ast.body[1]
    assert isinstance(u, Assign) and u.target == "u"
    assert u.value == BinOp("-", Sym("N"), IntLit(1))


def test_substitute_params_binds_lengths_and_ranges():
    ast = substitute_params(programs.load("binary_search"), {"N": 8})
    assert array_length(ast, "t") == 8
    quant = ast.precondition
    assert isinstance(quant, Quant)
    assert quant.hi == IntLit(7)
    assert not bound_names(ast)


def test_bound_names():
    assert bound_names(programs.load("sum_of_squares")) == ["N"]
    assert bound_names(programs.load("tritype")) == []


@pytest.mark.parametrize("name", sorted(programs.CORPUS))
def test_corpus_parses(name):
    ast = programs.load(name)
    assert ast.name in name or name.startswith(ast.name)


def test_corpus_size():
    correct = [n for n in programs.CORPUS if not n.endswith("_bug")]
    buggy = [n for n in programs.CORPUS if n.endswith("_bug")]
    assert len(buggy) == 2
    # findMin ships as the callee of selection sort next to the five benchmarks
    assert len(correct) == 6


@pytest.mark.parametrize("good,bad,old,new", [
    ("binary_search", "binary_search_bug", "l = m + 1;", "u = m - 1;"),
    ("tritype", "tritype_bug", "trityp == 2 && i + k > j", "trityp == 1 && i + k > j"),
])
def test_buggy_variant_is_one_edit(good, bad, old, new):
    a = programs.corpus_path(good).read_text().splitlines()
    b = programs.corpus_path(bad).read_text().splitlines()
    assert len(a) == len(b)
    diff = [(x, y) for x, y in zip(a, b) if x != y]
    # the header comment describes the variant; the code differs on one line
    code = [(x, y) for x, y in diff if not x.startswith("#")]
    assert len(code) == 1
    x, y = code[0]
    assert old in x and new in y and x.replace(old, new) == y


def test_buggy_binary_search_edit_is_on_line_11():
    ast = programs.load("binary_search_bug")
    src = programs.corpus_path("binary_search_bug").read_text().splitlines()
    assert src[ast.header_line - 1 + 10].strip() == "u = m - 1;"


def test_contract_clauses_after_body():
    ast = parse_program("fn f(int x) -> int { return x; } ensures result == x")
    assert ast.postcondition is not None
    assert "result" in pretty_print(ast)


def test_extern_declaration_ends_at_semicolon():
    ast = programs.load("selection_sort")
    c = ast.contract_for("findMin")
    assert c is not None and c.returns
    assert [p.name for p in c.params] == ["t", "lo"]
    assert ast.postcondition is not None


def test_comments_are_ignored():
    ast = parse_program("# header\nfn f(int x) -> int { # body\n return x; }")
    assert ast.body == (Return(Var("x")),)


@pytest.mark.parametrize("src", [
    "fn f(int x) { x = ; }",
    "fn f(int x) { if x > 0 x = 1; }",
    "fn f(int x) { x = 1 }",
    "fn f(int x) { while (x < 3) { x = x + 1; }",
    "fn f(int x) { x = 1 $ 2; }",
    "",
])
def test_syntax_errors(src):
    with pytest.raises(CpvSyntaxError):
        parse_program(src)


@pytest.mark.parametrize("src", [
    "fn f(int x) { y = 1; }",
    "fn f(int x) { x = t[0]; }",
    "fn f(int[3] t) { t = 1; }",
    "fn f(int x) { x = g(x); }",
    "fn f(int x) { x = x + (x < 1); }",
    "fn f(int x) { if (x) x = 1; }",
    "ensures result == 0 fn f(int x) { x = 1; }",
    "fn f(int x) -> int { int y = 0; return y; } ensures y == 0",
])
def test_type_errors(src):
    with pytest.raises(CpvTypeError):
        parse_program(src)


def test_error_carries_position():
    with pytest.raises(CpvSyntaxError) as e:
        parse_program("fn f(int x) {\n  x = ;\n}")
    assert e.value.pos.line == 2


def test_calls_only_as_assignment_rhs():
    src = """extern fn g(int a) -> int requires true ensures true;
fn f(int x) -> int { return g(x) + 1; }"""
    with pytest.raises(CpvTypeError):
        parse_program(src)


def test_call_array_actuals_must_be_names():
    src = """extern fn g(int[N] a) -> int requires true ensures true;
fn f(int[3] t) -> int { int r = g(t[0]); return r; }"""
    with pytest.raises(CpvTypeError):
        parse_program(src)


def test_contract_bindings_unify_lengths():
    c = programs.load("selection_sort").contract_for("findMin")
    assert contract_bindings(c, [8, None]) == {"M": 8}
    inst = instantiate_contract(c, {"M": 8})
    assert not [n for n in iter_nodes(inst.postcondition) if isinstance(n, Sym)]


def test_contract_bindings_conflict():
    src = """extern fn g(int[N] a, int[N] b) -> int requires true ensures true;
fn f(int[3] t, int[4] s) -> int { int r = g(t, s); return r; }"""
    c = parse_program(src).contract_for("g")
    with pytest.raises(BindingError):
        contract_bindings(c, [3, 4])


def test_substitute_rejects_nonpositive_length():
    with pytest.raises(BindingError):
        substitute_params(programs.load("binary_search"), {"N": 0})


def test_external_contracts_fill_missing_declarations():
    callee = programs.load("findMin").contract()
    src = """fn f(int[4] t) -> int { int k = findMin(t, 0); return k; }"""
    with pytest.raises(CpvTypeError):
        parse_program(src)
    ast = parse_program(src, [callee])
    assert ast.contract_for("findMin") is not None
    call = ast.body[0].value
    assert isinstance(call, Call) and isinstance(call.args[0], Var)


def test_precedence():
    ast = parse_program("fn f(int a, int b) -> int { return a + b * 2 - a / 3; }")
    e = ast.body[0].value
    assert e == BinOp("-", BinOp("+", Var("a"), BinOp("*", Var("b"), IntLit(2))),
                      BinOp("/", Var("a"), IntLit(3)))


def test_index_expression():
    ast = parse_program("fn f(int[3] t, int i) -> int { return t[i + 1]; }")
    assert ast.body[0].value == Index("t", BinOp("+", Var("i"), IntLit(1)))


@pytest.mark.parametrize("name", sorted(programs.CORPUS))
def test_pretty_print_round_trip_corpus(name):
    ast = programs.load(name)
    again = parse_program(pretty_print(ast))
    assert again.body == ast.body
    assert again.precondition == ast.precondition
    assert again.postcondition == ast.postcondition
    assert again.params == ast.params


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_pretty_print_round_trip_random(seed):
    ast = parse_program(random_program(seed))
    again = parse_program(pretty_print(ast))
    assert (again.body, again.precondition, again.postcondition) == \
        (ast.body, ast.precondition, ast.postcondition)
