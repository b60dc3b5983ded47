import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.core import (Clause, Cnf, Instance, Literal, Op, Regime, Relation, WeakOrder,
                           dual_cnf, dual_relation, orbit_of_assignment)
from artifact import gen
from conftest import F, grid_equiv


def blocks(w):
    return [set(b) for b in w.levels]


def test_literal_canonical_order_for_symmetric_ops():
    assert Literal.make(Op.EQ, 1, "y", "x") == Literal.make(Op.EQ, 1, "x", "y")
    assert Literal.make(Op.NEQ, 2, "v", "u").lhs == "u"
    assert Literal.make(Op.LT, 1, "y", "x").lhs == "y"


def test_clause_dedup_and_formula_set_equality():
    a = F("(and (lt 1 x y) (lt 1 x y))", 1)
    b = F("(lt 1 x y)", 1)
    assert a.clauses == b.clauses
    assert F("(or (eq 1 x y) (eq 1 y x))", 1).clauses[0] == Clause.of([Literal.make(Op.EQ, 1, "x", "y")])


def test_regimes():
    assert F("(lt 1 x y)", 1).regime == Regime.BASE
    assert F("(leq 1 x y)", 1).regime == Regime.SHAPE
    assert F("(eqv x y)", 1).regime == Regime.RAW


def test_top_and_bottom():
    assert Cnf.top(2).is_top and not Cnf.top(2).is_bottom
    assert Cnf.bottom(2).is_bottom


def test_cnf_rejects_out_of_range_dimension():
    with pytest.raises(ValueError):
        Cnf.make([Clause.of([Literal.make(Op.LT, 3, "x", "y")])], 2)


def test_dual_lt():
    r = Relation.define("r", ["x", "y"], F("(lt 1 x y)", 1))
    assert dual_relation(r, 1).definition.clauses == F("(lt 1 y x)", 1).clauses


def test_dual_eq_unchanged():
    r = Relation.define("r", ["x", "y"], F("(eq 1 x y)", 1))
    assert dual_relation(r, 1).definition == r.definition


def test_dual_of_structure_x():
    # x=y<z or y=z<x or z=x<y, reversed
    x = F("(and (or (eq 1 x y) (eq 1 y z) (eq 1 z x)) (or (lt 1 x z) (eq 1 y z) (eq 1 z x))"
          " (or (eq 1 x y) (lt 1 y x) (eq 1 z x)) (or (eq 1 x y) (eq 1 y z) (lt 1 z y))"
          " (or (neq 1 x y) (neq 1 y z)))", 1)
    want = F("(and (or (eq 1 x y) (eq 1 y z) (eq 1 z x)) (or (lt 1 z x) (eq 1 y z) (eq 1 z x))"
             " (or (eq 1 x y) (lt 1 x y) (eq 1 z x)) (or (eq 1 x y) (eq 1 y z) (lt 1 y z))"
             " (or (neq 1 x y) (neq 1 y z)))", 1)
    from conftest import grid_points, grid_truth
    p = grid_points(["x", "y", "z"], 1)
    x_, y_, z_ = (p[v][0] for v in "xyz")
    sem = ((x_ == y_) & (y_ < z_)) | ((y_ == z_) & (z_ < x_)) | ((z_ == x_) & (x_ < y_))
    sem_dual = ((x_ == y_) & (y_ > z_)) | ((y_ == z_) & (z_ > x_)) | ((z_ == x_) & (x_ > y_))
    assert (grid_truth(x, "xyz") == sem).all()
    assert (grid_truth(want, "xyz") == sem_dual).all()
    r = Relation.define("X", ["x", "y", "z"], x)
    assert dual_relation(r, 1).definition.clauses == want.clauses
    assert grid_equiv(dual_relation(r, 1).definition, want)


def test_dual_out_of_range():
    r = Relation.define("r", ["x", "y"], F("(lt 1 x y)", 1))
    with pytest.raises(ValueError):
        dual_relation(r, 2)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 2))
def test_dual_is_an_involution(seed, dim):
    phi = gen.random_cnf(random.Random(seed), 4, 3, 2, gen.SHAPE_OPS)
    assert dual_cnf(dual_cnf(phi, dim), dim) == phi


def test_orbit_examples():
    o = orbit_of_assignment({"x": (1, 2), "y": (1, 3)}, 2)
    assert blocks(o.per_dim[0]) == [{"x", "y"}] and blocks(o.per_dim[1]) == [{"x"}, {"y"}]
    o = orbit_of_assignment({"x": (0, 0)}, 2)
    assert blocks(o.per_dim[0]) == [{"x"}] == blocks(o.per_dim[1])
    o = orbit_of_assignment({"x": (1, 5), "y": (2, 5), "z": (2, 1)}, 2)
    assert blocks(o.per_dim[0]) == [{"x"}, {"y", "z"}]
    assert blocks(o.per_dim[1]) == [{"z"}, {"x", "y"}]


def test_orbit_rejects_bad_lengths():
    with pytest.raises(ValueError):
        orbit_of_assignment({"x": (1, 2), "y": (1,)}, 2)


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(st.sampled_from("xyzuv"), st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
                       min_size=1),
       st.lists(st.integers(1, 7), min_size=2, max_size=2),
       st.lists(st.integers(-9, 9), min_size=2, max_size=2))
def test_orbit_invariant_under_monotone_maps(assign, scale, shift):
    from fractions import Fraction
    moved = {v: tuple(Fraction(scale[i] * t[i] ** 3, 3) + shift[i] for i in range(2))
             for v, t in assign.items()}
    assert orbit_of_assignment(assign, 2) == orbit_of_assignment(moved, 2)


def test_weak_order_validation():
    with pytest.raises(ValueError):
        WeakOrder((frozenset({"x"}), frozenset({"x"})))
    with pytest.raises(ValueError):
        WeakOrder((frozenset(),))


def test_relation_and_instance_validation():
    with pytest.raises(ValueError):
        Relation.define("r", ["x", "x"], F("(lt 1 x x)", 1))
    r = Relation.define("r", ["x", "y"], F("(lt 1 x y)", 1))
    with pytest.raises(ValueError):
        Instance(("a",), (("r", ("a", "b")),), {"r": r})
    with pytest.raises(ValueError):
        Instance(("a", "b"), (("r", ("a",)),), {"r": r})
    with pytest.raises(ValueError):
        Instance(("a", "b"), (("q", ("a", "b")),), {"r": r})
    inst = Instance(("a", "b"), (("r", ("a", "b")), ("r", ("b", "a"))), {"r": r})
    assert inst.formula().clauses == F("(and (lt 1 a b) (lt 1 b a))", 1).clauses
