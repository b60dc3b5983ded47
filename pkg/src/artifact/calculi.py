"""Allen's interval algebra, cardinal directions and the block algebra as point formulas.

Intervals become two points ``X.lo < X.hi``.  A CDC element is one point of
the product and ``a R b`` with ``R = (R1, ..., Rn)`` means ``a_i Ri b_i`` in
every dimension.  A block is a pair of corners, its lower corner below its
upper corner in each dimension, and a block label is one Allen set per
dimension applied to that dimension's coordinates.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Sequence, Tuple, Union

import numpy as np

from . import oracle, synth
from .core import Clause, Cnf, Instance, Literal, Op, Relation, Var
from .normalize import reduce, to_cnf
from .sexpr import Document, Node, ParseError

# -- tables ------------------------------------------------------------------------

ALLEN_NAMES = ("p", "m", "o", "s", "d", "f", "eq", "fi", "di", "si", "oi", "mi", "pi")
ALLEN_ALIASES = {"e": "eq", "=": "eq", "≡": "eq", "equals": "eq"}
ALLEN_PARAMS = ("xl", "xh", "yl", "yh")

# endpoint atoms, besides the two domain conjuncts
ALLEN_ATOMS: Dict[str, List[Tuple[Op, str, str]]] = {
    "p": [(Op.LT, "xh", "yl")],
    "m": [(Op.EQ, "xh", "yl")],
    "o": [(Op.LT, "xl", "yl"), (Op.LT, "yl", "xh"), (Op.LT, "xh", "yh")],
    "s": [(Op.EQ, "xl", "yl"), (Op.LT, "xh", "yh")],
    "d": [(Op.LT, "yl", "xl"), (Op.LT, "xh", "yh")],
    "f": [(Op.EQ, "xh", "yh"), (Op.LT, "yl", "xl")],
    "eq": [(Op.EQ, "xl", "yl"), (Op.EQ, "xh", "yh")],
    "fi": [(Op.EQ, "xh", "yh"), (Op.LT, "xl", "yl")],
    "di": [(Op.LT, "xl", "yl"), (Op.LT, "yh", "xh")],
    "si": [(Op.EQ, "xl", "yl"), (Op.LT, "yh", "xh")],
    "oi": [(Op.LT, "yl", "xl"), (Op.LT, "xl", "yh"), (Op.LT, "yh", "xh")],
    "mi": [(Op.EQ, "yh", "xl")],
    "pi": [(Op.LT, "yh", "xl")],
}

# a R b iff a_i R^i b_i; dimension 1 is east-west, dimension 2 south-north
CDC_NAMES = {"EQ": "==", "N": "=>", "E": ">=", "S": "=<", "W": "<=",
             "NE": ">>", "SE": "><", "SW": "<<", "NW": "<>"}
CDC_ALIASES = {"=": "EQ"}
CDC_BY_SIGN = {v: k for k, v in CDC_NAMES.items()}


class Calculus(enum.Enum):
    ALLEN = "allen"
    CDC = "cdc"
    BLOCK = "block"


Label = Union[FrozenSet[str], Tuple[FrozenSet[str], ...]]


@dataclass
class CalculusNetwork:
    calculus: Calculus
    n: int
    nodes: List[Var]
    edges: List[Tuple[Var, Var, Label]]

    def __post_init__(self):
        known = set(self.nodes)
        for a, b, label in self.edges:
            for v in (a, b):
                if v not in known:
                    self.nodes.append(v)
                    known.add(v)
            sets = label if self.calculus is Calculus.BLOCK else (label,)
            if self.calculus is Calculus.BLOCK and len(sets) != self.n:
                raise ValueError("edge %s %s: block label needs %d sets" % (a, b, self.n))
            for s in sets:
                if not s:
                    raise ValueError("edge %s %s: empty relation set" % (a, b))


def allen_name(s: str) -> str:
    s = ALLEN_ALIASES.get(s, s)
    if s not in ALLEN_ATOMS:
        raise ValueError("unknown Allen relation %r" % s)
    return s


def allen_set(names: Sequence[str]) -> FrozenSet[str]:
    out = set()
    for s in names:
        if s in ("top", "⊤", "all"):
            out.update(ALLEN_NAMES)
        else:
            out.add(allen_name(s))
    return frozenset(out)


def cdc_sign(s: str, n: int) -> str:
    """Positional sign string over ``<=>`` for a CDC name."""
    if n == 2:
        key = CDC_ALIASES.get(s, s)
        if key in CDC_NAMES:
            return CDC_NAMES[key]
    if len(s) == n and set(s) <= set("<=>"):
        return s
    raise ValueError("unknown CDC relation %r for n=%d" % (s, n))


def cdc_set(names: Sequence[str], n: int) -> FrozenSet[str]:
    out = set()
    for s in names:
        if s in ("top", "⊤", "all"):
            out.update("".join(t) for t in itertools.product("<=>", repeat=n))
        else:
            out.add(cdc_sign(s, n))
    return frozenset(out)


def _ordered(names, order) -> List[str]:
    return sorted(names, key=order.index) if order else sorted(names)


def _atom(op: Op, dim: int, a: Var, b: Var) -> Literal:
    return Literal.make(op, dim, a, b)


def _union(name: str, params: Sequence[Var], dims: int, members: Sequence[Cnf]) -> Relation:
    """Reduced lt/eq CNF of a disjunction of conjunctions, via its orbit set."""
    if len(members) == 1:
        return Relation.define(name, params, reduce(members[0]))
    allowed = None
    for phi in members:
        t = oracle.project(phi, params, range(1, dims + 1)).allowed
        allowed = t if allowed is None else allowed | t
    space = synth.Space(params, range(1, dims + 1), allowed)
    res = synth.synthesize(space, [synth.any_template(range(1, dims + 1))])
    assert res.ok and synth.defines(space, res.clauses)
    return Relation.define(name, params, reduce(to_cnf(res.cnf(dims, params))))


# -- Allen ----------------------------------------------------------------------------

def allen_formula(name: str, dim: int = 1, dims: int = 1, params=ALLEN_PARAMS) -> Cnf:
    """Endpoint conjunction of one basic relation, with the domain conjuncts."""
    m = dict(zip(ALLEN_PARAMS, params))
    lits = [_atom(Op.LT, dim, m["xl"], m["xh"]), _atom(Op.LT, dim, m["yl"], m["yh"])]
    lits += [_atom(op, dim, m[a], m[b]) for op, a, b in ALLEN_ATOMS[allen_name(name)]]
    return Cnf.make([Clause.of([l]) for l in lits], dims, params)


@functools.lru_cache(maxsize=None)
def allen_relation(names: FrozenSet[str]) -> Relation:
    names = _ordered(names, ALLEN_NAMES)
    members = [allen_formula(s) for s in names]
    return _union("allen." + "+".join(names), ALLEN_PARAMS, 1, members)


def allen_basics() -> List[Relation]:
    return [allen_relation(frozenset([s])) for s in ALLEN_NAMES]


def _interval_domain(n: int) -> Relation:
    lits = [Clause.of([_atom(Op.LT, i, "lo", "hi")]) for i in range(1, n + 1)]
    name = "allen.interval" if n == 1 else "block.box%d" % n
    return Relation.define(name, ("lo", "hi"), Cnf.make(lits, n, ("lo", "hi")))


def corners(v: Var) -> Tuple[Var, Var]:
    return v + ".lo", v + ".hi"


def _translate_pairs(net: CalculusNetwork, rel_of) -> Instance:
    rels: Dict[str, Relation] = {}
    dom = _interval_domain(net.n)
    rels[dom.name] = dom
    vs: List[Var] = []
    cons = []
    for v in net.nodes:
        lo, hi = corners(v)
        vs += [lo, hi]
        cons.append((dom.name, (lo, hi)))
    for a, b, label in net.edges:
        r = rel_of(label)
        rels[r.name] = r
        cons.append((r.name, corners(a) + corners(b)))
    return Instance(tuple(vs), tuple(cons), rels)


def translate_allen(net: CalculusNetwork) -> Instance:
    if net.calculus is not Calculus.ALLEN:
        raise ValueError("not an Allen network")
    return _translate_pairs(net, allen_relation)


# -- CDC -----------------------------------------------------------------------------------

_SIGN_OP = {"<": (Op.LT, False), "=": (Op.EQ, False), ">": (Op.LT, True)}


def cdc_formula(sign: str, a: Var = "a", b: Var = "b") -> Cnf:
    lits = []
    for i, ch in enumerate(sign, start=1):
        op, swap = _SIGN_OP[ch]
        lits.append(_atom(op, i, b, a) if swap else _atom(op, i, a, b))
    return Cnf.make([Clause.of([l]) for l in lits], len(sign), (a, b))


def cdc_label(sign: str) -> str:
    return CDC_BY_SIGN.get(sign, sign) if len(sign) == 2 else sign


@functools.lru_cache(maxsize=None)
def cdc_relation(signs: FrozenSet[str], n: int) -> Relation:
    for s in signs:
        if len(s) != n:
            raise ValueError("CDC relation %r has the wrong arity for n=%d" % (s, n))
    ordered = sorted(signs, key=lambda s: ["<=>".index(c) for c in s])
    name = "cdc%s." % ("" if n == 2 else n) + "+".join(cdc_label(s) for s in ordered)
    return _union(name, ("a", "b"), n, [cdc_formula(s) for s in ordered])


def cdc_basics(n: int = 2) -> List[Relation]:
    return [cdc_relation(frozenset(["".join(t)]), n) for t in itertools.product("<=>", repeat=n)]


def translate_cdc(net: CalculusNetwork) -> Instance:
    if net.calculus is not Calculus.CDC:
        raise ValueError("not a CDC network")
    rels: Dict[str, Relation] = {}
    cons = []
    for a, b, label in net.edges:
        r = cdc_relation(frozenset(label), net.n)
        rels[r.name] = r
        cons.append((r.name, (a, b)))
    if not rels:
        # keep the dimension count visible on an edgeless network
        top = Relation.define("cdc.top", ("a",), Cnf.top(net.n, ("a",)))
        rels[top.name] = top
    return Instance(tuple(net.nodes), tuple(cons), rels)


# -- Block ----------------------------------------------------------------------------------

BLOCK_PARAMS = ALLEN_PARAMS


@functools.lru_cache(maxsize=None)
def block_relation(label: Tuple[FrozenSet[str], ...]) -> Relation:
    """Conjunction over dimensions of the per-dimension Allen unions."""
    n = len(label)
    clauses: List[Clause] = []
    parts = []
    for i, names in enumerate(label, start=1):
        r = allen_relation(frozenset(names))
        parts.append("+".join(_ordered(names, ALLEN_NAMES)) if len(names) < 13 else "top")
        for c in r.definition.clauses:
            clauses.append(Clause.of(Literal.make(l.op, i, l.lhs, l.rhs, l.negated) for l in c))
        # the domain survives even when the union is everything
        clauses.append(Clause.of([_atom(Op.LT, i, "xl", "xh")]))
        clauses.append(Clause.of([_atom(Op.LT, i, "yl", "yh")]))
    return Relation.define("block.%s" % "|".join(parts), BLOCK_PARAMS,
                           Cnf.make(clauses, n, BLOCK_PARAMS))


def block_basics(n: int = 2) -> List[Relation]:
    return [block_relation(tuple(frozenset([s]) for s in t))
            for t in itertools.product(ALLEN_NAMES, repeat=n)]


def translate_block(net: CalculusNetwork) -> Instance:
    if net.calculus is not Calculus.BLOCK:
        raise ValueError("not a block network")
    return _translate_pairs(net, lambda label: block_relation(tuple(frozenset(s) for s in label)))


def translate(net: CalculusNetwork) -> Instance:
    return {Calculus.ALLEN: translate_allen, Calculus.CDC: translate_cdc,
            Calculus.BLOCK: translate_block}[net.calculus](net)


def basic_relations(calculus: Calculus, n: int = 1) -> List[Relation]:
    if calculus is Calculus.ALLEN:
        return allen_basics()
    if calculus is Calculus.CDC:
        return cdc_basics(n)
    return block_basics(n)


def element_points(calculus: Calculus) -> int:
    """Point variables per network node."""
    return 1 if calculus is Calculus.CDC else 2


# -- network files -------------------------------------------------------------------

def _names(node: Node) -> List[str]:
    if node.atom is not None:
        return [node.atom]
    out = []
    for x in node.items:
        if x.atom is None:
            raise x.err("expected a relation name")
        out.append(x.atom)
    return out


def network_from_document(doc: Document) -> CalculusNetwork:
    if doc.calculus is None:
        raise ParseError("no (calculus ...) entry")
    kind, n = doc.calculus
    cal = Calculus(kind)
    edges = []
    for a, b, node in doc.edges:
        try:
            if cal is Calculus.ALLEN:
                label: Label = allen_set(_names(node))
            elif cal is Calculus.CDC:
                label = cdc_set(_names(node), n)
            else:
                if node.items is None or len(node.items) != n:
                    raise node.err("block label needs %d relation sets" % n)
                label = tuple(allen_set(_names(x)) for x in node.items)
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise node.err(str(e)) from None
        edges.append((a, b, label))
    try:
        return CalculusNetwork(cal, n, list(dict.fromkeys(doc.nodes)), edges)
    except ValueError as e:
        raise ParseError(str(e)) from None


def network_to_text(net: CalculusNetwork) -> str:
    head = {Calculus.ALLEN: "(calculus allen)", Calculus.CDC: "(calculus cdc %d)" % net.n,
            Calculus.BLOCK: "(calculus block %d)" % net.n}[net.calculus]
    lines = [head] + ["(node %s)" % v for v in net.nodes]
    for a, b, label in net.edges:
        if net.calculus is Calculus.ALLEN:
            txt = "(%s)" % " ".join(_ordered(label, ALLEN_NAMES))
        elif net.calculus is Calculus.CDC:
            txt = "(%s)" % " ".join(sorted(cdc_label(s) for s in label))
        else:
            txt = "(%s)" % "".join("(%s)" % " ".join(_ordered(s, ALLEN_NAMES)) for s in label)
        lines.append("(edge %s %s %s)" % (a, b, txt))
    return "\n".join(lines) + "\n"


# -- pp-definition fixtures -----------------------------------------------------------

@dataclass
class Fixture:
    name: str
    matrix: Cnf
    exist: Tuple[Var, ...]
    psi: Cnf
    free: Tuple[Var, ...]

    def check(self, budget: oracle.OracleBudget = oracle.DEFAULT_BUDGET) -> bool:
        return oracle.oracle_equiv_pp(self.matrix, self.exist, self.psi, self.free, budget)


def _conj(dims: int, *parts: Cnf) -> Cnf:
    clauses = [c for p in parts for c in p.clauses]
    vs = sorted({v for p in parts for v in p.vars})
    return Cnf.make(clauses, dims, vs)


def _unit(op: Op, dim: int, a: Var, b: Var, dims: int = 2) -> Cnf:
    return Cnf.make([Clause.of([_atom(op, dim, a, b)])], dims, (a, b))


def sf_s(a: Var, b: Var) -> Cnf:
    """``a s b`` for intervals read as points (start, end) of the plane."""
    return _conj(2, _unit(Op.EQ, 1, a, b), _unit(Op.LT, 2, a, b))


def sf_f(a: Var, b: Var) -> Cnf:
    return _conj(2, _unit(Op.EQ, 2, a, b), _unit(Op.LT, 1, b, a))


def sf_fixtures() -> List[Fixture]:
    return [
        Fixture("sf-eq1", _conj(2, sf_s("c", "a"), sf_s("c", "b")), ("c",),
                _unit(Op.EQ, 1, "a", "b"), ("a", "b")),
        Fixture("sf-eq2", _conj(2, sf_f("c", "a"), sf_f("c", "b")), ("c",),
                _unit(Op.EQ, 2, "a", "b"), ("a", "b")),
        Fixture("sf-lt1", _conj(2, _unit(Op.EQ, 1, "a", "c"), sf_f("d", "c"), sf_s("d", "b")),
                ("c", "d"), _unit(Op.LT, 1, "a", "b"), ("a", "b")),
        Fixture("sf-lt2", _conj(2, _unit(Op.EQ, 2, "b", "c"), sf_s("d", "c"), sf_f("d", "a")),
                ("c", "d"), _unit(Op.LT, 2, "a", "b"), ("a", "b")),
    ]


def _cdc(name: str, a: Var, b: Var) -> Cnf:
    return cdc_formula(CDC_NAMES[name], a, b)


def cdc_fixtures() -> List[Fixture]:
    free = ("x", "y")
    return [
        Fixture("cdc-lt1", _conj(2, _cdc("SW", "x", "z"), _cdc("NW", "z", "y")), ("z",),
                _unit(Op.LT, 1, "x", "y"), free),
        Fixture("cdc-eq1", _conj(2, _cdc("S", "x", "z"), _cdc("N", "z", "y")), ("z",),
                _unit(Op.EQ, 1, "x", "y"), free),
        Fixture("cdc-lt2", _conj(2, _cdc("SW", "x", "z"), _cdc("SE", "z", "y")), ("z",),
                _unit(Op.LT, 2, "x", "y"), free),
        Fixture("cdc-eq2", _conj(2, _cdc("W", "x", "z"), _cdc("E", "z", "y")), ("z",),
                _unit(Op.EQ, 2, "x", "y"), free),
    ]


def _block(label: Sequence[Sequence[str]], x: Var, y: Var) -> Cnf:
    r = block_relation(tuple(allen_set(s) for s in label))
    return r.instantiate(corners(x) + corners(y))


def block_fixtures() -> List[Fixture]:
    zs = corners("z")
    return [
        Fixture("block-m1", _conj(2, _block([["m"], ["p"]], "x", "z"), _block([["eq"], ["p"]], "y", "z")),
                zs, _block([["m"], ["top"]], "x", "y"), corners("x") + corners("y")),
        Fixture("block-m2", _conj(2, _block([["p"], ["m"]], "x", "z"), _block([["p"], ["eq"]], "y", "z")),
                zs, _block([["top"], ["m"]], "x", "y"), corners("x") + corners("y")),
    ]


def all_fixtures() -> List[Fixture]:
    return sf_fixtures() + cdc_fixtures() + block_fixtures()


def partition_check(rels: Sequence[Relation], domain: Cnf) -> bool:
    """Are the relations pairwise disjoint and jointly the whole domain?"""
    params = rels[0].params
    dims = rels[0].dims
    count = None
    for r in rels:
        t = oracle.project(r.definition, params, range(1, dims + 1)).allowed.astype(np.int32)
        count = t if count is None else count + t
    dom = oracle.project(domain, params, range(1, dims + 1)).allowed
    return bool(np.array_equal(count, dom.astype(np.int32)))
