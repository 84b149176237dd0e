"""Compare symbolic verdicts with exhaustive concrete enumeration."""
from cpverify.executor import (
    ASSERTION_VIOLATION, CONTRACT_VIOLATION, OVERFLOW_VIOLATION, PARTIALLY_CORRECT,
    POSTCONDITION_VIOLATION, ExploreOptions, explore,
)
from cpverify.interp import brute_force_verify, outcome

KIND = {POSTCONDITION_VIOLATION: "postcondition", ASSERTION_VIOLATION: "assertion",
        CONTRACT_VIOLATION: "contract", OVERFLOW_VIOLATION: "overflow"}


def agree(ast, bits, overflow=False, callees=None):
    """Assert that explore and brute force tell the same story about ``ast``."""
    bf = brute_force_verify(ast, bits=bits, check_overflow=overflow, callees=callees)
    opts = ExploreOptions(bits=bits, check_overflow=overflow)
    r = explore(ast, opts)
    if bf.verdict == "correct":
        assert r.verdict == PARTIALLY_CORRECT, r.witness
        return r
    assert r.verdict != PARTIALLY_CORRECT, bf.witness
    kind = KIND[r.verdict]
    assert kind in bf.kinds
    # the witness itself trips the reported kind when run concretely
    assert outcome(ast, r.witness, bits, overflow, callees) == kind
    full = explore(ast, ExploreOptions(bits=bits, check_overflow=overflow, exhaustive=True))
    assert {KIND[k] for k in full.kinds} == set(bf.kinds)
    return r
