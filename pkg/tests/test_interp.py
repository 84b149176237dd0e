import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cpverify import programs
from cpverify.interp import (
    ASSERT_FAIL, BLOCKED, OVERFLOW, POSTCONDITION, RETURNED, StepLimitExceeded, brute_force_verify,
    concrete_interpret, outcome, postcondition_fails, precondition_holds,
)
from cpverify.parser import parse_program


def tritype(i, j, k, name="tritype"):
    return concrete_interpret(programs.load(name), {"i": i, "j": j, "k": k}).value


def test_buggy_tritype_calls_a_flat_triangle_isosceles():
    assert tritype(1, 1, 2, "tritype_bug") == 2
    assert tritype(1, 1, 2) == 4


@pytest.mark.parametrize("sides,expected", [
    ((3, 3, 3), 3), ((3, 4, 5), 1), ((2, 2, 3), 2), ((1, 2, 3), 4), ((0, 1, 1), 4),
])
def test_tritype_classes(sides, expected):
    assert tritype(*sides) == expected


def test_buggy_binary_search_misses_present_value():
    ast = programs.load("binary_search_bug", {"N": 8})
    t = [-128, -127, -126, -125, -124, -123, -122, -121]
    r = concrete_interpret(ast, {"t": t, "v": -126})
    assert r.status == RETURNED and r.value == -1
    assert t[2] == -126
    assert precondition_holds(ast, {"t": t, "v": -126})
    assert postcondition_fails(ast, {"t": t, "v": -126}, r)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-128, 127), min_size=8, max_size=8))
def test_binary_search_finds_first_element(t):
    t.sort()
    ast = programs.load("binary_search", {"N": 8})
    r = concrete_interpret(ast, {"t": t, "v": t[0]})
    assert t[r.value] == t[0]


def test_trace_records_each_test():
    ast = programs.load("binary_search", {"N": 8})
    t = list(range(8))
    r = concrete_interpret(ast, {"t": t, "v": 3})
    # loop test, then the hit at m = 3
    assert r.trace == ("T4", "T6")
    r = concrete_interpret(ast, {"t": t, "v": 1})
    assert r.trace == ("T4", "F6", "T8", "T4", "T6")


def test_tritype_small_box_by_enumeration():
    good, bad = programs.load("tritype"), programs.load("tritype_bug")
    failing = []
    for i, j, k in itertools.product(range(5), repeat=3):
        inputs = {"i": i, "j": j, "k": k}
        assert outcome(good, inputs, 8) is None
        if outcome(bad, inputs, 8) == POSTCONDITION:
            failing.append((i, j, k))
    assert (1, 1, 2) in failing


def test_brute_force_tritype():
    assert brute_force_verify(programs.load("tritype"), bits=4).verdict == "correct"
    r = brute_force_verify(programs.load("tritype_bug"), bits=4)
    assert r.verdict == POSTCONDITION
    w = r.witness
    assert tritype(w["i"], w["j"], w["k"], "tritype_bug") == 2


def test_sum_of_squares_over_permutations():
    ast = programs.load("sum_of_squares", {"N": 3})
    for perm in itertools.permutations([1, 2, 3]):
        assert concrete_interpret(ast, {"t": list(perm), "n": 3}).value == 14 == 3 * 4 * 7 // 6
    assert brute_force_verify(ast, bits=4).verdict == "correct"


def test_bubble_sort_sorts_descending_input():
    ast = programs.load("bubble_sort", {"N": 5})
    r = concrete_interpret(ast, {"t": [4, 3, 2, 1, 0]})
    assert r.arrays["t"] == [0, 1, 2, 3, 4]


def test_selection_sort_with_callee():
    ast = programs.load("selection_sort", {"N": 4})
    r = concrete_interpret(ast, {"t": [3, -1, 2, 0]}, callees=programs.callees("selection_sort"))
    assert r.arrays["t"] == [-1, 0, 2, 3]


def test_step_limit():
    ast = parse_program("fn f(int x) { while (x == x) { x = x; } }")
    with pytest.raises(StepLimitExceeded):
        concrete_interpret(ast, {"x": 0}, step_limit=1000)


def test_assert_failure_is_an_outcome():
    ast = parse_program("fn f(int x) { assert x > 0; }")
    assert concrete_interpret(ast, {"x": 0}).status == ASSERT_FAIL
    assert outcome(ast, {"x": 0}, 8) == ASSERT_FAIL


def test_overflow_only_when_checked():
    ast = parse_program("fn f(int x) -> int { int y = x + x; return y; }")
    assert concrete_interpret(ast, {"x": 100}, check_overflow=True).status == OVERFLOW
    # unchecked, an out-of-range value blocks the run, as domains prune the path
    assert concrete_interpret(ast, {"x": 100}).status == BLOCKED
    assert concrete_interpret(ast, {"x": 60}).value == 120


def test_division_truncates():
    ast = parse_program("fn f(int x) -> int { return x / 2; }")
    assert concrete_interpret(ast, {"x": -3}).value == -1


def test_brute_force_refuses_large_spaces():
    with pytest.raises(ValueError):
        brute_force_verify(programs.load("binary_search", {"N": 8}), bits=8)
