import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from artifact import classify as C
from artifact import gen
from artifact.core import Relation
from conftest import F


def rel(name, params, text, dims=1):
    return Relation.define(name, params, F(text, dims, params))


LT = rel("lt", ("x", "y"), "(lt 1 x y)")
LT12 = rel("lt12", ("x", "y"), "(or (lt 1 x y) (lt 2 x y))", 2)
NE3 = rel("ne3", ("x", "y", "z"), "(or (neq 1 x y) (neq 1 y z))")
GTMIN = rel("gtmin", ("x", "y", "z"), "(or (lt 1 y x) (lt 1 z x))")

EVERY = {f.name for f in C.ALL_FAMILIES}


def test_order_preserved_by_everything():
    assert C.closure_facts([LT]).names(1) == EVERY
    assert C.is_ord_horn(LT).ord_horn


def test_disjunction_across_dimensions_only_lex():
    facts = C.closure_facts([LT12])
    lexes = {"LEX", "LEX*", "TWISTED_LEX", "TWISTED_LEX*"}
    assert facts.names(1) == facts.names(2) == lexes
    res = C.is_ord_horn(LT12)
    assert not res.ord_horn and res.counterexample.verify()
    for name in EVERY - lexes:
        cex = facts.per_dim[1][name].counterexample
        assert cex is not None and cex.verify()


def test_inequality_is_not_min_closed():
    names = C.closure_facts([NE3]).names(1)
    assert not names & {"MIN", "MIN*", "MAX", "MAX*"}
    assert {"PP", "LL"} <= names
    assert C.is_ord_horn(NE3).ord_horn


def test_greater_than_a_minimum():
    names = C.closure_facts([GTMIN]).names(1)
    assert {"PP", "LL", "MIN"} <= names
    assert "LL*" not in names and "MIN*" not in names
    assert not C.is_ord_horn(GTMIN).ord_horn


def test_profiles():
    assert C.dimension_profile([LT, NE3, GTMIN]).verdict == C.ProfileVerdict.TRACTABLE
    p = C.dimension_profile([LT12])
    assert p.verdict == C.ProfileVerdict.HARD_IF_BINARY and p.offenders == ["lt12"]
    assert C.dimension_profile([]).verdict == C.ProfileVerdict.TRACTABLE


def test_binary_expansion_checks_arity():
    v = C.classify_binary_expansion([LT])
    assert v.label == "P" and "lt" in v.witnesses
    assert C.classify_binary_expansion([LT12]).label == "NP-COMPLETE"
    with pytest.raises(ValueError):
        C.classify_binary_expansion([NE3])


def test_family_names_round_trip():
    for f in C.ALL_FAMILIES:
        assert C.OpFamily.parse(f.name.lower()) == f


def test_dimension_out_of_range():
    with pytest.raises(ValueError):
        C.check_preservation(LT, 2, C.ALL_FAMILIES[0])


def brute_closed(r, op):
    """Closure under pointwise min/max on all assignments into 0..2n-1.

    Any two tuples of an n-ary relation use at most 2n values, and the
    operations commute with order embeddings, so this range is exhaustive.
    """
    f = min if op == "min" else max
    pts = [dict(zip(r.params, ((c,) for c in combo)))
           for combo in itertools.product(range(2 * r.arity), repeat=r.arity)]
    members = [p for p in pts if r.definition.evaluate(p)]
    for s, t in itertools.product(members, repeat=2):
        if not r.definition.evaluate({v: (f(s[v][0], t[v][0]),) for v in r.params}):
            return False
    return True


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_min_max_against_brute_force(seed):
    rng = random.Random(seed)
    r = gen.random_relation(rng, "r", rng.randint(2, 3), 1, rng.randint(1, 3))
    for op in ("min", "max"):
        cex = C.check_ops(r, (op,))
        assert (cex is None) == brute_closed(r, op)
        if cex is not None:
            assert cex.verify()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_counterexamples_verify(seed):
    rng = random.Random(seed)
    r = gen.random_relation(rng, "r", rng.randint(2, 3), 2, rng.randint(1, 3))
    for name, p in C.closure_facts([r]).per_dim[1].items():
        if not p.holds:
            assert p.counterexample.verify()
