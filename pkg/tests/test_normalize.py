import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import gen, oracle
from artifact.core import Cnf, Regime, Relation
from artifact.normalize import (EqualitySet, NormalizationCapExceeded, classify_clause, cm,
                                decompose, find_rewrite, hat, is_normal, normalize,
                                normalize_with_stats, reduce, shape_report, step_cap,
                                strongest_S_consequence, to_cnf, ve)
from artifact.sexpr import parse_document
from conftest import DATA, F, grid_equiv, grid_sat

WORKED = "(and (eq 1 x y) (or (eq 1 u v) (eqv x y)) (or (lt 1 u v) (lt 2 x y)))"
WORKED_NORMAL = ("(and (eq 1 x y) (or (eq 1 u v) (eq 2 x y)) (or (lt 2 x y) (eq 2 x y))"
                 " (or (lt 1 u v) (eq 1 u v)) (or (neq 2 x y) (neq 1 u v)))")


# -- to_cnf ---------------------------------------------------------------------------

def test_r4_negated_lt():
    assert to_cnf(F("(not (lt 1 x y))", 1)).clauses == F("(or (lt 1 y x) (eq 1 y x))", 1).clauses


def test_r2_full_disequality():
    out = to_cnf(F("(neqv x y)"))
    assert out.clauses == F("(or (lt 1 x y) (lt 1 y x) (lt 2 x y) (lt 2 y x))").clauses


def test_r3_full_equality():
    assert to_cnf(F("(eqv x y)")).clauses == F("(and (eq 1 x y) (eq 2 x y))").clauses


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_to_cnf_is_base_and_equivalent(seed):
    rng = random.Random(seed)
    vs = gen.var_names(3)
    from artifact.core import Clause, Literal, Op
    lits = lambda: [Literal.make(rng.choice([Op.LT, Op.EQ, Op.LEQ, Op.NEQ, Op.EQV, Op.NEQV]),
                                 rng.randint(1, 2), *rng.sample(vs, 2), rng.random() < 0.3)
                    for _ in range(rng.randint(1, 3))]
    raw = Cnf.make([Clause.of(lits()) for _ in range(rng.randint(1, 3))], 2, vs)
    out = to_cnf(raw)
    assert out.regime == Regime.BASE
    assert grid_equiv(raw, out, vs)


# -- reduce ---------------------------------------------------------------------------

def test_reduce_drops_refuted_literal():
    phi = F("(and (or (lt 1 x y) (eq 1 x y)) (or (lt 1 y x) (lt 1 z x)))", 1)
    assert reduce(phi).clauses == F("(and (or (lt 1 x y) (eq 1 x y)) (lt 1 z x))", 1).clauses


def test_reduce_duplicate_and_unsat():
    assert reduce(F("(and (lt 1 x y) (lt 1 x y))", 1)).clauses == F("(lt 1 x y)", 1).clauses
    assert reduce(F("(and (lt 1 x y) (lt 1 y x))", 1)).is_bottom


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6))
def test_reduce_is_equivalent_and_reduced(seed):
    phi = gen.random_cnf(random.Random(seed), 4, 3, 2)
    out = reduce(phi)
    assert grid_equiv(phi, out, phi.vars)
    if out.is_bottom:
        return
    for c in out.clauses:
        rest = [d for d in out.clauses if d != c]
        assert not grid_equiv(out, out.with_clauses(rest), phi.vars)
        for l in c.literals:
            shorter = out.with_clauses(rest + [c.without(l)])
            assert not grid_equiv(out, shorter, phi.vars)


# -- normalize ------------------------------------------------------------------------

def test_worked_example_exact():
    out = normalize(to_cnf(F(WORKED)))
    assert out.clauses == F(WORKED_NORMAL).clauses


def test_worked_example_from_corpus():
    doc = parse_document((DATA / "worked.qrel").read_text())
    out = normalize(to_cnf(doc.relations["worked"].definition))
    assert out.clauses == F(WORKED_NORMAL, 2, ["x", "y", "u", "v"]).clauses


def test_normal_inputs_unchanged():
    for text in ("(or (eq 1 x y) (lt 1 y z))", "(or (lt 1 u v) (lt 2 x y))"):
        phi = F(text)
        assert normalize(phi) == phi
        assert find_rewrite(phi, "R5") is None and find_rewrite(phi, "R6") is None


def test_normalize_rejects_raw():
    with pytest.raises(ValueError):
        normalize(F("(eqv x y)"))


def test_step_cap_is_enforced():
    with pytest.raises(NormalizationCapExceeded):
        normalize_with_stats(to_cnf(F(WORKED)), max_steps=0)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_normalize_random_base(seed):
    phi = gen.random_cnf(random.Random(seed), 4, 3, 2)
    out, stats = normalize_with_stats(phi)
    assert grid_equiv(phi, out, phi.vars)
    assert stats.r5_steps <= stats.r5_cap and stats.r6_steps <= stats.r6_cap
    assert stats.r5_cap == step_cap(reduce(phi))
    assert is_normal(out)


# -- clause kinds and decomposition ---------------------------------------------------

def test_classify_clause_examples():
    k = classify_clause(F("(or (eq 1 x y) (lt 1 y z))").clauses[0], 2)
    assert k.determined == {1}
    k = classify_clause(F("(or (lt 1 x y) (eq 2 x y))").clauses[0], 2)
    assert not k.determined and not k.weakly
    k = classify_clause(F("(or (neq 1 x y) (neq 2 u v))").clauses[0], 2)
    assert k.weakly == {1: {2}, 2: {1}}


def test_decompose_examples():
    phi = F("(and (lt 2 x y) (or (neq 2 u v) (leq 1 z x)))")
    s, per, rest = decompose(phi, {2})
    assert s.clauses == F("(lt 2 x y)").clauses
    assert per[1].clauses == F("(or (neq 2 u v) (leq 1 z x))").clauses
    assert rest.is_top
    s, per, rest = decompose(Cnf.top(2), {2})
    assert s.is_top and per[1].is_top and rest.is_top
    _, _, rest = decompose(F("(or (lt 1 x y) (lt 2 u v))"), {2})
    assert not rest.is_top


def test_hat_examples():
    phi = F("(and (or (eq 1 x y) (eq 1 x z)) (or (lt 1 x y) (lt 1 x z) (lt 1 x u)))")
    out = hat(phi, 1)
    assert out.dims == 1 and out.clauses == F(
        "(and (or (eq 1 x y) (eq 1 x z)) (or (lt 1 x y) (lt 1 x z) (lt 1 x u)))", 1).clauses
    assert hat(F("(lt 2 a b)"), 2).clauses == F("(lt 1 a b)", 1).clauses
    assert hat(Cnf.top(2), 1).is_top
    with pytest.raises(ValueError):
        hat(F("(lt 2 a b)"), 1)


def test_ve_examples():
    out = ve(F("(and (lt 1 x y) (eq 2 x y))"))
    assert out.clauses == F("(and (lt 1 x^1 y^1) (eq 1 x^2 y^2))", 1).clauses
    assert ve(Cnf.top(2)).is_top
    out = ve(F("(or (neq 2 u v) (lt 2 z x) (eq 2 z x))"))
    assert out.clauses == F("(or (neq 1 u^2 v^2) (lt 1 z^2 x^2) (eq 1 z^2 x^2))", 1).clauses


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_ve_preserves_satisfiability(seed):
    phi = gen.random_cnf(random.Random(seed), 3, 3, 2, gen.SHAPE_OPS)
    assert grid_sat(phi) == (oracle.oracle_sat(ve(phi)) is not None)


def test_cm_examples():
    phi = F("(and (or (leq 1 x y) (neq 2 u v)) (lt 2 z u))")
    out = cm(phi, {2}, EqualitySet.of([("u", "v", 2)]))
    assert out.clauses == F("(and (leq 1 x y) (lt 2 z u) (eq 2 u v))").clauses
    out = cm(phi, {2}, EqualitySet())
    assert out.clauses == F("(and (neq 2 u v) (lt 2 z u))").clauses
    plain = F("(and (leq 1 x y) (lt 2 z u))")
    assert cm(plain, {2}, EqualitySet()) == plain


def test_strongest_consequence_examples():
    assert strongest_S_consequence(F("(and (lt 1 x y) (lt 2 x y))"), {1}).clauses == \
        F("(lt 1 x y)").clauses
    assert strongest_S_consequence(F("(lt 2 x y)"), {1}).is_top
    assert strongest_S_consequence(F("(or (lt 1 x y) (lt 2 x y))"), {1}).is_top


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 2))
def test_strongest_consequence_is_implied_and_strongest(seed, s):
    phi = gen.random_cnf(random.Random(seed), 3, 3, 2, gen.SHAPE_OPS)
    out = strongest_S_consequence(phi, {s})
    assert all(l.dim == s for l in out.literals())
    # implied
    assert all(oracle.oracle_implies(phi, c) for c in out.clauses)
    # strongest: every dim-s orbit allowed by out extends to a model of phi
    proj = oracle.project(phi, phi.vars, [s])
    assert proj.allowed.sum() == oracle.project(out, phi.vars, [s]).allowed.sum()


# -- shape report ---------------------------------------------------------------------

def test_shape_report_vacuous_and_malformed():
    r = Relation.define("r", ["x", "y"], F("(lt 1 x y)"))
    assert shape_report(r, {1: {"PP", "LL"}, 2: {"PP", "LL"}}).passed
    bad = Relation.define("bad", ["x", "y", "u", "v"], F("(or (lt 1 x y) (lt 2 u v))"))
    rep = shape_report(bad, {1: {"PP"}, 2: {"PP"}})
    check = next(c for c in rep.checks if c.name == "ineq-mix")
    assert check.applicable and not check.passed and "lt 1 x y" in check.detail


def test_shape_report_ll_both_dimensions():
    from artifact import classify
    r = Relation.define("weak", ["x", "y", "u", "v"], F("(or (neq 1 x y) (neq 2 u v))"))
    facts = classify.closure_facts([r])
    assert "LL" in facts.names(1) and "LL" in facts.names(2)
    rep = shape_report(r, facts.as_sets())
    ll = next(c for c in rep.checks if c.name == "ll-both")
    assert ll.applicable and ll.passed and rep.passed
