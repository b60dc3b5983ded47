import itertools

import pytest

from artifact import calculi as K
from artifact import oracle
from artifact.core import Cnf
from artifact.sexpr import ParseError, parse_document
from conftest import DATA, F


def allen_of(x, y):
    """Basic Allen relation of integer intervals, straight from endpoint comparisons."""
    (a, b), (c, d) = x, y
    if b < c:
        return "p"
    if b == c:
        return "m"
    if d < a:
        return "pi"
    if d == a:
        return "mi"
    if a == c and b == d:
        return "eq"
    if a == c:
        return "s" if b < d else "si"
    if b == d:
        return "f" if a > c else "fi"
    if c < a and b < d:
        return "d"
    if a < c and d < b:
        return "di"
    return "o" if a < c else "oi"


def intervals(k):
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


def test_allen_basics_match_endpoint_semantics():
    rels = {r.name.split(".")[1]: r for r in K.allen_basics()}
    assert len(rels) == 13
    for x, y in itertools.product(intervals(5), repeat=2):
        want = allen_of(x, y)
        for name, r in rels.items():
            env = dict(zip(K.ALLEN_PARAMS, ((v,) for v in x + y)))
            assert r.definition.evaluate(env) == (name == want), (x, y, name)


def test_partitions():
    dom = F("(and (lt 1 xl xh) (lt 1 yl yh))", 1, K.ALLEN_PARAMS)
    assert K.partition_check(K.allen_basics(), dom)
    assert K.partition_check(K.cdc_basics(2), Cnf.top(2, ("a", "b")))
    assert len(K.cdc_basics(3)) == 27 and K.partition_check(K.cdc_basics(3), Cnf.top(3, ("a", "b")))
    box = F("(and (lt 1 xl xh) (lt 1 yl yh) (lt 2 xl xh) (lt 2 yl yh))", 2, K.ALLEN_PARAMS)
    assert K.partition_check(K.block_basics(2), box)


def test_partition_check_detects_overlap_and_gaps():
    dom = F("(and (lt 1 xl xh) (lt 1 yl yh))", 1, K.ALLEN_PARAMS)
    assert not K.partition_check(K.allen_basics()[1:], dom)
    assert not K.partition_check(K.allen_basics() + [K.allen_basics()[0]], dom)


def test_cdc_convention():
    # a N b: same east-west coordinate, a strictly north of b
    r = K.cdc_relation(frozenset([K.cdc_sign("N", 2)]), 2)
    assert r.definition.evaluate({"a": (0, 1), "b": (0, 0)})
    assert not r.definition.evaluate({"a": (0, 0), "b": (0, 1)})
    ne = K.cdc_relation(frozenset([K.cdc_sign("NE", 2)]), 2)
    assert ne.definition.evaluate({"a": (1, 1), "b": (0, 0)})


def test_cdc_union_north_south():
    r = K.cdc_relation(K.cdc_set(["N", "S"], 2), 2)
    assert r.name == "cdc.S+N"
    want = F("(and (eq 1 a b) (neq 2 a b))", 2, ("a", "b"))
    assert oracle.oracle_equiv_pp(r.definition, (), want, ("a", "b"))


def test_allen_union_is_equivalent_to_disjunction():
    r = K.allen_relation(K.allen_set(["p", "m"]))
    want = F("(and (lt 1 xl xh) (lt 1 yl yh) (or (lt 1 xh yl) (eq 1 xh yl)))", 1, K.ALLEN_PARAMS)
    assert oracle.oracle_equiv_pp(r.definition, (), want, K.ALLEN_PARAMS)
    assert K.allen_set(["top"]) == frozenset(K.ALLEN_NAMES)


@pytest.mark.parametrize("fx", K.all_fixtures(), ids=lambda f: f.name)
def test_fixtures(fx):
    assert fx.check()


def test_fixture_check_is_not_vacuous():
    fx = K.cdc_fixtures()[0]
    fx.psi = F("(lt 2 x y)", 2, ("x", "y"))
    assert not fx.check()


@pytest.mark.parametrize("name", ["allen_m.net", "cdc_cycle.net", "cdc_chain.net", "block_pair.net"])
def test_network_round_trip(name):
    net = K.network_from_document(parse_document((DATA / name).read_text()))
    text = K.network_to_text(net)
    again = K.network_from_document(parse_document(text))
    assert again == net and K.network_to_text(again) == text


@pytest.mark.parametrize("name,sat", [("allen_m.net", False), ("cdc_cycle.net", False),
                                      ("cdc_chain.net", True), ("block_pair.net", True)])
def test_translation_semantics(name, sat):
    net = K.network_from_document(parse_document((DATA / name).read_text()))
    inst = K.translate(net)
    assert len(inst.vars) == len(net.nodes) * K.element_points(net.calculus)
    assert (oracle.oracle_sat(inst.formula()) is not None) == sat


def test_block_translation_keeps_boxes():
    net = K.CalculusNetwork(K.Calculus.BLOCK, 2, ["r", "s"],
                            [("r", "s", (K.allen_set(["top"]), K.allen_set(["top"])))])
    sol = oracle.oracle_sat(K.translate(net).formula())
    assert sol is not None


@pytest.mark.parametrize("text", [
    "(calculus allen)\n(edge X Y (zz))",
    "(calculus cdc 2)\n(edge a b (<<<))",
    "(calculus block 2)\n(edge r s ((m)))",
    "(calculus allen)\n(edge X Y ())",
    "(node a)",
])
def test_bad_networks(text):
    with pytest.raises(ParseError):
        K.network_from_document(parse_document(text))
