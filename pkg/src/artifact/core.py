"""Formula, relation and instance types over products of the rational order.

A formula lives over ``(Q;<)^n``: every atom compares the ``i``-th
coordinates of two variables.  Variables are plain strings.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

Var = str


class Op(enum.IntEnum):
    LT = 0
    LEQ = 1
    EQ = 2
    NEQ = 3
    # full tuple (dis)equality, only in raw input
    EQV = 4
    NEQV = 5


class Regime(enum.Enum):
    RAW = "raw"
    BASE = "base"
    SHAPE = "shape"


SYMMETRIC = (Op.EQ, Op.NEQ, Op.EQV, Op.NEQV)
OP_NAMES = {Op.LT: "lt", Op.LEQ: "leq", Op.EQ: "eq", Op.NEQ: "neq",
            Op.EQV: "eqv", Op.NEQV: "neqv"}
NAME_OPS = {v: k for k, v in OP_NAMES.items()}


@dataclass(frozen=True, order=True)
class Literal:
    """An atom ``lhs op_dim rhs``; ``negated`` is only legal in raw input.

    Use :meth:`make` to get the canonical argument order.
    """

    op: Op
    dim: int
    lhs: Var
    rhs: Var
    negated: bool = False

    @staticmethod
    def make(op: Op, dim: int, lhs: Var, rhs: Var, negated: bool = False) -> "Literal":
        op = Op(op)
        if op in SYMMETRIC and rhs < lhs:
            lhs, rhs = rhs, lhs
        if op in (Op.EQV, Op.NEQV):
            dim = 0
        return Literal(op, dim, lhs, rhs, negated)

    @property
    def raw(self) -> bool:
        return self.negated or self.op in (Op.EQV, Op.NEQV)

    def negate(self) -> "Literal":
        """Negation as a single literal (only for non-raw literals)."""
        if self.raw:
            raise ValueError("cannot negate raw literal %s" % (self,))
        if self.op == Op.LT:
            return Literal.make(Op.LEQ, self.dim, self.rhs, self.lhs)
        if self.op == Op.LEQ:
            return Literal.make(Op.LT, self.dim, self.rhs, self.lhs)
        if self.op == Op.EQ:
            return Literal.make(Op.NEQ, self.dim, self.lhs, self.rhs)
        return Literal.make(Op.EQ, self.dim, self.lhs, self.rhs)

    def rename(self, m: Mapping[Var, Var]) -> "Literal":
        return Literal.make(self.op, self.dim, m.get(self.lhs, self.lhs),
                            m.get(self.rhs, self.rhs), self.negated)

    def evaluate(self, point: Mapping[Var, Sequence[int]]) -> bool:
        a, b = point[self.lhs], point[self.rhs]
        if self.op == Op.EQV:
            v = tuple(a) == tuple(b)
        elif self.op == Op.NEQV:
            v = tuple(a) != tuple(b)
        else:
            x, y = a[self.dim - 1], b[self.dim - 1]
            v = {Op.LT: x < y, Op.LEQ: x <= y, Op.EQ: x == y, Op.NEQ: x != y}[self.op]
        return v != self.negated

    @property
    def trivial(self) -> Optional[bool]:
        """Truth value when both sides are the same variable, else None."""
        if self.lhs != self.rhs:
            return None
        return (self.op in (Op.LEQ, Op.EQ, Op.EQV)) != self.negated

    def __str__(self) -> str:
        from .sexpr import literal_to_sexpr
        return literal_to_sexpr(self)


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals.  The empty clause is false."""

    literals: Tuple[Literal, ...] = ()

    @staticmethod
    def of(lits: Iterable[Literal]) -> "Clause":
        return Clause(tuple(sorted(set(lits))))

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def dims(self) -> frozenset:
        return frozenset(l.dim for l in self.literals)

    def vars(self) -> set:
        out = set()
        for l in self.literals:
            out.add(l.lhs)
            out.add(l.rhs)
        return out

    def without(self, lit: Literal) -> "Clause":
        return Clause(tuple(l for l in self.literals if l != lit))

    def rename(self, m: Mapping[Var, Var]) -> "Clause":
        return Clause.of(l.rename(m) for l in self.literals)

    def evaluate(self, point: Mapping[Var, Sequence[int]]) -> bool:
        return any(l.evaluate(point) for l in self.literals)

    def key(self):
        return self.literals

    def __str__(self) -> str:
        from .sexpr import clause_to_sexpr
        return clause_to_sexpr(self)


def _regime_of(clauses: Sequence[Clause]) -> Regime:
    shape = False
    for c in clauses:
        for l in c.literals:
            if l.raw:
                return Regime.RAW
            if l.op in (Op.LEQ, Op.NEQ):
                shape = True
    return Regime.SHAPE if shape else Regime.BASE


@dataclass(frozen=True)
class Cnf:
    """Conjunction of clauses over ``dims`` dimensions.

    Clauses are kept deduplicated and sorted, so two formulas with the same
    clause set compare equal.  The empty conjunction is true.
    """

    clauses: Tuple[Clause, ...]
    dims: int
    vars: Tuple[Var, ...]
    regime: Regime

    @staticmethod
    def make(clauses: Iterable[Clause], dims: int,
             vars: Optional[Iterable[Var]] = None) -> "Cnf":
        cl = tuple(sorted(set(clauses), key=Clause.key))
        seen = set()
        for c in cl:
            seen |= c.vars()
            for l in c.literals:
                if l.dim > dims or (l.dim < 1 and l.op not in (Op.EQV, Op.NEQV)):
                    raise ValueError("literal %s outside %d dimensions" % (l, dims))
        if vars is None:
            vs = tuple(sorted(seen))
        else:
            vs = tuple(dict.fromkeys(vars))
            missing = seen - set(vs)
            if missing:
                raise ValueError("undeclared variables %s" % sorted(missing))
        return Cnf(cl, dims, vs, _regime_of(cl))

    @staticmethod
    def top(dims: int, vars: Iterable[Var] = ()) -> "Cnf":
        return Cnf.make((), dims, vars)

    @staticmethod
    def bottom(dims: int, vars: Iterable[Var] = ()) -> "Cnf":
        return Cnf.make((Clause(),), dims, vars)

    @property
    def is_top(self) -> bool:
        return not self.clauses

    @property
    def is_bottom(self) -> bool:
        return Clause() in self.clauses

    def literals(self):
        for c in self.clauses:
            yield from c.literals

    def with_clauses(self, clauses: Iterable[Clause]) -> "Cnf":
        return Cnf.make(clauses, self.dims, self.vars)

    def conjoin(self, other: "Cnf") -> "Cnf":
        return Cnf.make(self.clauses + other.clauses, max(self.dims, other.dims),
                        tuple(self.vars) + tuple(other.vars))

    def rename(self, m: Mapping[Var, Var]) -> "Cnf":
        vs = [m.get(v, v) for v in self.vars]
        return Cnf.make((c.rename(m) for c in self.clauses), self.dims, vs)

    def evaluate(self, point: Mapping[Var, Sequence[int]]) -> bool:
        return all(c.evaluate(point) for c in self.clauses)

    def __str__(self) -> str:
        from .sexpr import cnf_to_sexpr
        return cnf_to_sexpr(self)


@dataclass(frozen=True)
class WeakOrder:
    """Ordered partition of a variable set, lowest block first."""

    levels: Tuple[frozenset, ...]

    def __post_init__(self):
        seen = set()
        for b in self.levels:
            if not b:
                raise ValueError("empty block in weak order")
            if seen & b:
                raise ValueError("blocks of a weak order must be disjoint")
            seen |= b

    @staticmethod
    def from_ranks(vars: Sequence[Var], ranks: Sequence[int]) -> "WeakOrder":
        blocks: Dict[int, set] = {}
        for v, r in zip(vars, ranks):
            blocks.setdefault(int(r), set()).add(v)
        return WeakOrder(tuple(frozenset(blocks[k]) for k in sorted(blocks)))

    @property
    def vars(self) -> frozenset:
        return frozenset().union(*self.levels) if self.levels else frozenset()

    def rank(self) -> Dict[Var, int]:
        return {v: i for i, b in enumerate(self.levels) for v in b}

    def __str__(self) -> str:
        return "[" + ", ".join("{" + ",".join(sorted(b)) + "}" for b in self.levels) + "]"


@dataclass(frozen=True)
class OrbitTuple:
    per_dim: Tuple[WeakOrder, ...]

    def __post_init__(self):
        vs = {w.vars for w in self.per_dim}
        if len(vs) > 1:
            raise ValueError("weak orders of an orbit tuple disagree on variables")

    @property
    def dims(self) -> int:
        return len(self.per_dim)

    def embedding(self) -> Dict[Var, Tuple[int, ...]]:
        """Consecutive integer levels per dimension."""
        ranks = [w.rank() for w in self.per_dim]
        vs = self.per_dim[0].vars if self.per_dim else frozenset()
        return {v: tuple(r[v] for r in ranks) for v in sorted(vs)}


@dataclass(frozen=True)
class Relation:
    """A named relation of the given arity, defined by a formula over params."""

    name: str
    arity: int
    dims: int
    params: Tuple[Var, ...]
    definition: Cnf

    def __post_init__(self):
        if self.arity < 1 or len(self.params) != self.arity:
            raise ValueError("relation %s: arity/params mismatch" % self.name)
        if len(set(self.params)) != self.arity:
            raise ValueError("relation %s: repeated parameter" % self.name)
        extra = set(self.definition.vars) - set(self.params)
        if extra:
            raise ValueError("relation %s: free variables %s" % (self.name, sorted(extra)))

    @staticmethod
    def define(name: str, params: Sequence[Var], definition: Cnf) -> "Relation":
        d = Cnf.make(definition.clauses, definition.dims, params)
        return Relation(name, len(params), definition.dims, tuple(params), d)

    def instantiate(self, args: Sequence[Var]) -> Cnf:
        """Definition with params substituted by ``args``."""
        if len(args) != self.arity:
            raise ValueError("relation %s expects %d arguments" % (self.name, self.arity))
        return self.definition.rename(dict(zip(self.params, args)))

    def with_definition(self, definition: Cnf) -> "Relation":
        return Relation.define(self.name, self.params, definition)


@dataclass(frozen=True)
class Instance:
    vars: Tuple[Var, ...]
    constraints: Tuple[Tuple[str, Tuple[Var, ...]], ...]
    relations: Mapping[str, Relation] = field(compare=False)

    def __post_init__(self):
        vs = set(self.vars)
        dims = {r.dims for r in self.relations.values()}
        if len(dims) > 1:
            raise ValueError("relations disagree on the number of dimensions")
        for name, args in self.constraints:
            if name not in self.relations:
                raise ValueError("unknown relation %s" % name)
            if len(args) != self.relations[name].arity:
                raise ValueError("constraint %s: wrong number of arguments" % name)
            if not set(args) <= vs:
                raise ValueError("constraint %s uses undeclared variables" % name)

    @property
    def dims(self) -> int:
        for r in self.relations.values():
            return r.dims
        return 1

    def formula(self) -> Cnf:
        """Conjunction of all instantiated constraints."""
        clauses = []
        for name, args in self.constraints:
            clauses.extend(self.relations[name].instantiate(args).clauses)
        return Cnf.make(clauses, self.dims, self.vars)


@dataclass(frozen=True)
class Solution:
    orbit: OrbitTuple
    embedding: Mapping[Var, Tuple[int, ...]]

    @staticmethod
    def from_embedding(emb: Mapping[Var, Sequence[int]], dims: int) -> "Solution":
        orbit = orbit_of_assignment(emb, dims)
        return Solution(orbit, orbit.embedding())


def dual_relation(r: Relation, dim: int) -> Relation:
    """Reverse the order of dimension ``dim`` in the definition of ``r``."""
    if not 1 <= dim <= r.dims:
        raise ValueError("dimension %d out of range 1..%d" % (dim, r.dims))
    return r.with_definition(dual_cnf(r.definition, dim))


def dual_cnf(phi: Cnf, dim: int) -> Cnf:
    def flip(l: Literal) -> Literal:
        if l.dim == dim and l.op in (Op.LT, Op.LEQ):
            return Literal.make(l.op, l.dim, l.rhs, l.lhs, l.negated)
        return l
    return phi.with_clauses(Clause.of(flip(l) for l in c) for c in phi.clauses)


def orbit_of_assignment(assignment: Mapping[Var, Sequence], dims: int) -> OrbitTuple:
    """Group variables by equal coordinate per dimension, blocks ascending."""
    for v, t in assignment.items():
        if len(t) != dims:
            raise ValueError("tuple for %s has length %d, expected %d" % (v, len(t), dims))
    out = []
    for i in range(dims):
        blocks: Dict[object, set] = {}
        for v, t in assignment.items():
            blocks.setdefault(t[i], set()).add(v)
        out.append(WeakOrder(tuple(frozenset(blocks[k]) for k in sorted(blocks))))
    return OrbitTuple(tuple(out))
