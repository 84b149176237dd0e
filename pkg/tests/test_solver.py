import random

import pytest
from hypothesis import given, settings, strategies as st

from _paths import drive, postcondition
from _stores import Layout, domains, random_store, solutions
from cpverify import programs
from cpverify.constraints import (
    CAllDiff, CRel, Model, SArr, SBin, SCell, SConst, SVar, holds, negate,
)
from cpverify.executor import ExploreOptions, explore
from cpverify.interp import concrete_interpret
from cpverify.solver import (
    BudgetExceeded, SolverConfig, check, check_cheap, check_complete, counter_model, entails,
    propagate_store,
)
from cpverify.solver import _dbm_py

X, Y, M = SVar("x", 0), SVar("y", 0), SVar("m", 0)
L, U = SVar("l", 0), SVar("u", 0)


def rel(op, a, b):
    return CRel(op, a, SConst(b) if isinstance(b, int) else b)


def in_range(x, lo, hi):
    return [rel(">=", x, lo), rel("<=", x, hi)]


# -- cheap layer -------------------------------------------------------------------

def test_cheap_empty_interval():
    assert check_cheap([rel(">=", X, 5), rel("<=", X, 3)]).unsat


def test_cheap_ignores_nonlinear():
    v = check_cheap([rel("==", SBin("*", X, X), 2)])
    assert v.status == "unknown"
    assert check_complete([rel("==", SBin("*", X, X), 2)]).unsat


def test_cheap_never_answers_sat():
    assert check_cheap([rel("==", X, 3)]).status == "unknown"


def test_cheap_refutes_sortedness_chain():
    ast = programs.load("binary_search", {"N": 8})
    t = SArr("t", 0, 8)
    v = SVar("v", 0)
    store = [CRel("<=", SCell(t, SConst(i)), SCell(t, SConst(i + 1))) for i in range(7)]
    store += [CRel("!=", SCell(t, SConst(3)), v), CRel("<=", SCell(t, SConst(3)), v),
              CRel("==", SCell(t, SConst(1)), v)]
    assert ast.param("t").is_array
    assert check_cheap(store).unsat


# -- complete layer ----------------------------------------------------------------

def test_complete_finds_fixed_value():
    v = check_complete(in_range(X, 0, 10) + [rel("==", X, 3)])
    assert v.sat and v.model.vars[("x", 0)] == 3


def test_correct_path_entails_post():
    ast = programs.load("binary_search", {"N": 8})
    cfg = drive(ast, ["T4", "F6", "T8", "T4", "T6"])
    post = postcondition(ast, cfg)
    assert check_complete(list(cfg.store.items) + [negate(post)]).unsat
    assert entails(cfg.store, post)


def test_buggy_path_has_checked_model():
    ast = programs.load("binary_search_bug", {"N": 8})
    report = explore(ast, ExploreOptions(bits=8))
    cfg = drive(ast, report.trace)
    store = list(cfg.store.items) + [negate(postcondition(ast, cfg))]
    v = check_complete(store)
    assert v.sat
    assert all(holds(c, v.model) for c in store)
    m = v.model
    t = m.arrays[("t", 0)]
    assert m.vars[("result", 0)] == -1 and m.vars[("v", 0)] in t


def test_known_counterexample_is_admissible():
    # one hand-picked model of the failing path: v=-126 on an ascending array
    ast = programs.load("binary_search_bug", {"N": 8})
    t = list(range(-128, -120))
    out = concrete_interpret(ast, {"t": t, "v": -126}, bits=8)
    assert out.value == -1 and -126 in t


def test_entails_trivial():
    assert entails([rel("==", X, 3)], rel(">=", X, 0))
    assert not entails([], rel(">=", X, 0))
    m = counter_model([], rel(">=", X, 0))
    assert m.vars[("x", 0)] < 0


def test_check_reports_layer():
    assert check([rel(">=", X, 5), rel("<=", X, 3)]).stats["layer"] == "cheap"
    assert check([rel("==", SBin("*", X, X), 2)]).stats["layer"] == "complete"


def test_budget_is_a_hard_error():
    t = SArr("t", 0, 5)
    cell = lambda i: SCell(t, SConst(i))
    store = [CAllDiff(t)] + [c for i in range(5) for c in in_range(cell(i), 0, 9)]
    store.append(rel("==", SBin("+", SBin("*", cell(0), cell(1)), cell(2)), 71))
    with pytest.raises(BudgetExceeded):
        check_complete(store, SolverConfig(node_budget=2, shave=False))
    assert check_complete(store).sat


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(bits=1)
    with pytest.raises(ValueError):
        SolverConfig(solvers=("complete", "cheap"))
    with pytest.raises(ValueError):
        SolverConfig(labeling="random")


def test_model_respects_bit_width():
    v = check_complete([rel(">", X, 5)], SolverConfig(bits=4))
    assert v.sat and v.model.vars[("x", 0)] <= 7
    assert check_complete([rel(">", X, 7)], SolverConfig(bits=4)).unsat


# -- propagators ------------------------------------------------------------------

def dom(store, key):
    d = propagate_store(store)
    return None if d is None else d[key]


def test_element_selects_supported_index():
    i = SVar("i", 0)
    a = SArr("a", 0, 2)
    store = in_range(i, 0, 1) + [rel("==", SCell(a, SConst(0)), 5),
                                 rel("==", SCell(a, SConst(1)), 7),
                                 rel("==", SCell(a, i), 7)]
    assert dom(store, i) == [1]


def test_element_without_support_fails():
    i = SVar("i", 0)
    a = SArr("a", 0, 2)
    store = in_range(i, 0, 1) + in_range(SCell(a, SConst(0)), 5, 7) \
        + in_range(SCell(a, SConst(1)), 5, 7) + [rel("==", SCell(a, i), 9)]
    assert propagate_store(store) is None


def test_element_fixpoint_keeps_singletons():
    i = SVar("i", 0)
    a = SArr("a", 0, 2)
    store = [rel("==", i, 1), rel("==", SCell(a, SConst(0)), 5),
             rel("==", SCell(a, SConst(1)), 7), rel("==", SCell(a, i), 7)]
    d = propagate_store(store)
    assert d[i] == [1] and d[(a, 0)] == [5] and d[(a, 1)] == [7]


def test_alldifferent_cases():
    t2, t3 = SArr("t", 0, 2), SArr("t", 0, 3)
    cells = lambda t: [SCell(t, SConst(i)) for i in range(t.length)]
    assert propagate_store([CAllDiff(t2)] + [rel("==", c, 1) for c in cells(t2)]) is None
    pigeon = [CAllDiff(t3)] + [x for c in cells(t3) for x in in_range(c, 1, 2)]
    assert propagate_store(pigeon) is None
    fixed = [CAllDiff(t3)] + [rel("==", c, k + 1) for k, c in enumerate(cells(t3))]
    d = propagate_store(fixed)
    assert [d[(t3, k)] for k in range(3)] == [[1], [2], [3]]


def test_midpoint_folds_to_three():
    assert dom([rel("==", L, 0), rel("==", U, 7), CRel("==", M, SBin("/", SBin("+", L, U),
                                                                     SConst(2)))], M) == [3]


def test_square_root_of_four():
    store = in_range(Y, -3, 3) + [CRel("==", X, SBin("*", Y, Y)), rel("==", X, 4)]
    assert dom(store, Y) == [-2, 2]


def test_division_truncates_toward_zero():
    assert dom([rel("==", Y, -3), CRel("==", X, SBin("/", Y, SConst(2)))], X) == [-1]


def test_division_by_zero_is_pruned():
    store = in_range(Y, 0, 2) + [CRel("==", X, SBin("/", SConst(6), Y))]
    d = propagate_store(store)
    assert 0 not in d[Y]
    assert check_complete(store + [rel("==", Y, 0)]).unsat


def _kind_store(kind, seed):
    return random_store(random.Random(seed), kinds=(kind,))


@pytest.mark.parametrize("kind", ["lin", "prod", "div", "elem", "alldiff", "or"])
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10 ** 9))
def test_propagation_keeps_every_solution(kind, seed):
    layout, boxes, store = _kind_store(kind, seed)
    doms = domains(layout, store)
    sols = solutions(layout, boxes, store)
    if doms is None:
        assert not sols
        return
    for box, d in zip(boxes, doms):
        assert d <= set(box)   # contracting
    for values in sols:
        assert all(x in d for x, d in zip(values, doms))


@pytest.mark.parametrize("kind", ["lin", "prod", "div", "elem", "alldiff", "or"])
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10 ** 9), cut=st.integers(0, 3), bound=st.integers(-4, 7))
def test_propagation_is_monotone(kind, seed, cut, bound):
    layout, boxes, store = _kind_store(kind, seed)
    slot = layout.slots[cut % len(layout.slots)]
    loose = domains(layout, store)
    tight = domains(layout, store + [rel("<=", slot, bound)])
    if loose is None:
        assert tight is None
        return
    if tight is not None:
        assert all(b <= a for a, b in zip(loose, tight))


# -- soundness against enumeration ---------------------------------------------

@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 10 ** 9))
def test_complete_matches_enumeration(seed):
    layout, boxes, store = random_store(random.Random(seed))
    sols = solutions(layout, boxes, store)
    v = check_complete(store)
    assert v.sat == bool(sols)
    if v.sat:
        assert all(holds(c, v.model) for c in store)
    if check_cheap(store).unsat:
        assert not sols


def test_layout_model_round_trip():
    lay = Layout(["a"], 2)
    m = lay.model((1, 2, 3))
    assert m == Model({("a", 0): 1}, {("t", 0): [2, 3]})


# -- difference-bound kernels -----------------------------------------------------

def _dbm_script(cls, seed):
    rng = random.Random(seed)
    d = cls(6)
    log = []
    for _ in range(60):
        i, j = rng.randrange(6), rng.randrange(6)
        if i == j:
            continue
        r = d.add_edge(i, j, rng.randint(-4, 12))
        log.append(r)
        if r < 0:
            d = cls(6)
    other = cls(6)
    other.add_edge(1, 2, 3)
    r = other.meet_with(d)
    log.append(r)
    if r >= 0:   # after a negative cycle the matrix contents are unspecified
        log.append([other.get(a, b) for a in range(6) for b in range(6)])
    return log


def test_kernels_agree():
    ext = pytest.importorskip("cpverify.solver._dbm_ext")
    for seed in range(40):
        assert _dbm_script(_dbm_py.DBM, seed) == _dbm_script(ext.DBM, seed)


def test_dbm_detects_negative_cycle():
    d = _dbm_py.DBM(3)
    assert d.add_edge(1, 2, 2) >= 0
    assert d.add_edge(2, 1, -3) < 0
