"""Single-dimension solvers over the rational order.

``pa_closure`` handles unit literals, ``solve_ll_horn`` decides sets of
ll-Horn clauses (Ord-Horn included) and ``solve_min_form`` decides clause
sets of the shape ``y1 != x or ... or z1 <= x or ...``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx

from . import _kernels_py, kernels
from .core import Clause, Literal, Op, Var, WeakOrder
from .normalize import EqualitySet


# -- point algebra ------------------------------------------------------------

class _Contradiction:
    def __repr__(self):
        return "CONTRADICTION"

    def __bool__(self):
        return False


CONTRADICTION = _Contradiction()


@dataclass(frozen=True)
class PointState:
    """Closed point-algebra facts over equality classes (keyed by representative)."""

    classes: Mapping[Var, Var]
    strict: FrozenSet[Tuple[Var, Var]]
    nonstrict: FrozenSet[Tuple[Var, Var]]
    diseq: FrozenSet[FrozenSet[Var]]

    def same(self, x: Var, y: Var) -> bool:
        return self.classes[x] == self.classes[y]


def pa_closure(units: Iterable[Literal]):
    """Least fixed point of merging, edge insertion and cycle checks.

    Returns a ``PointState`` or ``CONTRADICTION``.  Dimensions are ignored.
    """
    units = list(units)
    vs = sorted({v for l in units for v in (l.lhs, l.rhs)})
    parent = {v: v for v in vs}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for l in units:
        if l.op == Op.EQ:
            parent[find(l.lhs)] = find(l.rhs)
    while True:
        g = nx.DiGraph()
        g.add_nodes_from({find(v) for v in vs})
        strict = set()
        for l in units:
            a, b = find(l.lhs), find(l.rhs)
            if l.op in (Op.LT, Op.LEQ):
                g.add_edge(a, b)
                if l.op == Op.LT:
                    strict.add((a, b))
        merged = False
        for comp in nx.strongly_connected_components(g):
            if any(a in comp and b in comp for a, b in strict):
                return CONTRADICTION
            if len(comp) > 1:
                comp = sorted(comp)
                for v in comp[1:]:
                    parent[find(v)] = find(comp[0])
                merged = True
        if not merged:
            break
    diseq = set()
    for l in units:
        if l.op == Op.NEQ:
            a, b = find(l.lhs), find(l.rhs)
            if a == b:
                return CONTRADICTION
            diseq.add(frozenset((a, b)))
    cls = {v: find(v) for v in vs}
    return PointState(cls,
                      frozenset((cls[l.lhs], cls[l.rhs]) for l in units if l.op == Op.LT),
                      frozenset((cls[l.lhs], cls[l.rhs]) for l in units if l.op == Op.LEQ),
                      frozenset(diseq))


# -- ll-Horn ------------------------------------------------------------------

@dataclass(frozen=True)
class LlHornClause:
    """``x1 != y1 or ... or z1 < z0 or ... or (z0 = z1 = ... = zl)``.

    ``head`` is None for a clause made of disequalities only.
    """

    neq: Tuple[Tuple[Var, Var], ...] = ()
    strict: Tuple[Var, ...] = ()
    head: Optional[Var] = None
    tail: bool = False

    def __post_init__(self):
        if self.head is None and (self.strict or self.tail):
            raise ValueError("strict part or tail without a head")

    @staticmethod
    def lt(x: Var, y: Var) -> "LlHornClause":
        return LlHornClause((), (x,), y, False)

    @staticmethod
    def leq(x: Var, y: Var) -> "LlHornClause":
        return LlHornClause((), (x,), y, True)

    @staticmethod
    def ne(x: Var, y: Var) -> "LlHornClause":
        return LlHornClause(((x, y),))

    @staticmethod
    def eq(x: Var, y: Var) -> List["LlHornClause"]:
        return [LlHornClause.leq(x, y), LlHornClause.leq(y, x)]

    def vars(self) -> Set[Var]:
        out = {v for p in self.neq for v in p} | set(self.strict)
        if self.head is not None:
            out.add(self.head)
        return out

    def holds(self, level: Mapping[Var, int]) -> bool:
        if any(level[x] != level[y] for x, y in self.neq):
            return True
        if self.head is None:
            return False
        h = level[self.head]
        if any(level[z] < h for z in self.strict):
            return True
        return self.tail and all(level[z] == h for z in self.strict)

    def rename(self, m: Mapping[Var, Var]) -> "LlHornClause":
        g = lambda v: m.get(v, v)
        return LlHornClause(tuple((g(x), g(y)) for x, y in self.neq), tuple(g(z) for z in self.strict),
                            None if self.head is None else g(self.head), self.tail)

    def __str__(self) -> str:
        parts = ["%s!=%s" % p for p in self.neq] + ["%s<%s" % (z, self.head) for z in self.strict]
        if self.tail:
            parts.append("=".join((self.head,) + self.strict))
        return " | ".join(parts) if parts else "false"


def _encode(clauses: Sequence[LlHornClause], vs: Sequence[Var]):
    idx = {v: i for i, v in enumerate(vs)}
    ptr, a, b, head, zm, tail = [0], [], [], [], [], []
    for c in clauses:
        for x, y in c.neq:
            a.append(idx[x])
            b.append(idx[y])
        ptr.append(len(a))
        head.append(-1 if c.head is None else idx[c.head])
        m = 0
        for z in c.strict:
            m |= 1 << idx[z]
        zm.append(m)
        tail.append(1 if c.tail else 0)
    return ptr, a, b, head, zm, tail


def _solve_levels(clauses: Sequence[LlHornClause], vs: Sequence[Var]) -> Optional[Dict[Var, int]]:
    enc = _encode(clauses, vs)
    impl = kernels.ll_horn_solve if len(vs) <= 64 else _kernels_py.ll_horn_solve
    lev = impl(len(vs), *enc)
    if lev is None:
        return None
    return {v: int(lev[i]) for i, v in enumerate(vs)}


def _vars_of(clauses, vars):
    vs = list(vars) if vars is not None else []
    seen = set(vs)
    for c in clauses:
        for v in sorted(c.vars()):
            if v not in seen:
                seen.add(v)
                vs.append(v)
    return vs


def solve_ll_horn(clauses: Iterable[LlHornClause],
                  vars: Optional[Sequence[Var]] = None) -> Optional[WeakOrder]:
    """A layered solution, or None when unsatisfiable."""
    clauses = list(clauses)
    vs = _vars_of(clauses, vars)
    lev = _solve_levels(clauses, vs)
    if lev is None:
        return None
    assert all(c.holds(lev) for c in clauses)
    return WeakOrder.from_ranks(vs, [lev[v] for v in vs])


def equality_set(clauses: Iterable[LlHornClause], vars: Optional[Sequence[Var]] = None,
                 dim: int = 1) -> Tuple[EqualitySet, WeakOrder]:
    """Pairs equal in every solution, and a solution injective outside them."""
    clauses = list(clauses)
    vs = _vars_of(clauses, vars)
    first = _solve_levels(clauses, vs)
    if first is None:
        raise ValueError("equality_set needs a satisfiable clause set")
    forced = []
    free = []
    for i, x in enumerate(vs):
        for y in vs[i + 1:]:
            # pairs separated by some solution are not forced
            if first[x] != first[y] or _solve_levels(clauses + [LlHornClause.ne(x, y)], vs) is not None:
                free.append((x, y))
            else:
                forced.append((x, y, dim))
    extra = [LlHornClause.ne(x, y) for x, y in free]
    lev = _solve_levels(clauses + extra, vs)
    if lev is None:
        raise AssertionError("no solution injective outside the equality set")
    return EqualitySet.of(forced), WeakOrder.from_ranks(vs, [lev[v] for v in vs])


def ll_horn_of_atoms(atoms) -> LlHornClause:
    """Convert a synthesized disjunction (literals plus at most one chain) to a clause."""
    from .synth import Tail
    neq, strict, head, tail = [], [], None, False
    for a in atoms:
        if isinstance(a, Tail):
            tail = True
            head = a.head
            continue
        if a.op == Op.NEQ:
            neq.append((a.lhs, a.rhs))
        elif a.op == Op.LT:
            if head is not None and a.rhs != head:
                raise ValueError("strict literals with different heads")
            head = a.rhs
            strict.append(a.lhs)
        else:
            raise ValueError("literal %s is not ll-Horn" % (a,))
    return LlHornClause(tuple(neq), tuple(strict), head, tail)


# -- min form -------------------------------------------------------------------

@dataclass(frozen=True)
class MinFormClause:
    """``y1 != x or ... or z1 <= x or ...`` with pivot ``x``."""

    pivot: Var
    neq: Tuple[Var, ...] = ()
    leq: Tuple[Var, ...] = ()

    def vars(self) -> Set[Var]:
        return {self.pivot, *self.neq, *self.leq}

    def holds(self, level: Mapping[Var, int]) -> bool:
        x = level[self.pivot]
        return any(level[y] != x for y in self.neq) or any(level[z] <= x for z in self.leq)

    def rename(self, m: Mapping[Var, Var]) -> "MinFormClause":
        g = lambda v: m.get(v, v)
        return MinFormClause(g(self.pivot), tuple(map(g, self.neq)), tuple(map(g, self.leq)))

    def to_clause(self, dim: int = 1) -> Clause:
        return Clause.of([Literal.make(Op.NEQ, dim, y, self.pivot) for y in self.neq] +
                         [Literal.make(Op.LEQ, dim, z, self.pivot) for z in self.leq])

    def __str__(self) -> str:
        parts = ["%s!=%s" % (y, self.pivot) for y in self.neq] + \
                ["%s<=%s" % (z, self.pivot) for z in self.leq]
        return " | ".join(parts) if parts else "false"


class ShapeError(ValueError):
    pass


def min_form_of(c: Clause) -> MinFormClause:
    """Read a clause of ``neq``/``leq`` literals sharing a pivot."""
    cands = None
    for l in c.literals:
        if l.op == Op.LEQ:
            s = {l.rhs}
        elif l.op == Op.NEQ:
            s = {l.lhs, l.rhs}
        else:
            raise ShapeError("literal %s is not in min form" % (l,))
        cands = s if cands is None else cands & s
    if cands is None:
        raise ShapeError("empty clause has no pivot")
    if not cands:
        raise ShapeError("clause %s has no common pivot" % (c,))
    x = min(cands)
    neq = tuple(sorted({l.lhs if l.rhs == x else l.rhs for l in c.literals if l.op == Op.NEQ}))
    leq = tuple(sorted({l.lhs for l in c.literals if l.op == Op.LEQ}))
    return MinFormClause(x, neq, leq)


def units_to_min_form(units: Iterable[Literal]) -> List[MinFormClause]:
    out = []
    for l in units:
        x, y = l.lhs, l.rhs
        if l.op == Op.LEQ:
            out.append(MinFormClause(y, (), (x,)))
        elif l.op == Op.NEQ:
            out.append(MinFormClause(y, (x,), ()))
        elif l.op == Op.LT:
            out += [MinFormClause(y, (), (x,)), MinFormClause(y, (x,), ())]
        else:
            out += [MinFormClause(y, (), (x,)), MinFormClause(x, (), (y,))]
    return out


MIN_FORM_NODES = 200_000


def solve_min_form(clauses: Iterable[MinFormClause], units: Iterable[Literal] = (),
                   vars: Optional[Sequence[Var]] = None,
                   max_nodes: int = MIN_FORM_NODES) -> Optional[WeakOrder]:
    """Place a set of variables at the bottom, then solve the rest.

    A candidate bottom set K is admissible when no clause is falsified by
    putting exactly K at the minimum: pivot in K, every ``!=`` partner in K
    and every ``<=`` member above.  Clauses touching K are then satisfied,
    so the rest is the subproblem on the remaining variables.

    Starting from all remaining variables, a falsified clause without
    ``!=`` partners forces its pivot out.  Other falsified clauses are
    repaired by dropping the pivot first (the plain elimination) and, if
    that leads nowhere, one of the partners.  Results are memoized on the
    remaining set.

    The answer is exact on every input.  The bottom block of any solution
    is admissible and every repair keeps some superset of it reachable, and
    once any admissible K is found, the rest is a subset of the clauses, so
    it is satisfiable whenever the whole set is.  The branching is what may
    cost exponential time, hence ``max_nodes``.
    """
    from .oracle import BudgetExceeded

    cl = list(clauses) + units_to_min_form(units)
    vs = list(vars) if vars is not None else []
    for c in cl:
        for v in sorted(c.vars()):
            if v not in vs:
                vs.append(v)
    order = {v: i for i, v in enumerate(vs)}
    falsified = lambda c, K: (c.pivot in K and all(y in K for y in c.neq)
                              and not any(z in K for z in c.leq))
    memo: Dict[FrozenSet[Var], Optional[List[FrozenSet[Var]]]] = {}
    nodes = [0]

    def tick():
        nodes[0] += 1
        if nodes[0] > max_nodes:
            raise BudgetExceeded("min-form search exceeded %d nodes" % max_nodes)

    def bottoms(K: FrozenSet[Var], live: List[MinFormClause], seen: Set[FrozenSet[Var]]):
        tick()
        K = set(K)
        changed = True
        while changed:
            changed = False
            for c in live:
                if not c.neq and falsified(c, K):
                    K.discard(c.pivot)
                    changed = True
        K = frozenset(K)
        if not K or K in seen:
            return
        seen.add(K)
        bad = next((c for c in live if falsified(c, K)), None)
        if bad is None:
            yield K
            return
        choices = [bad.pivot] + sorted(set(bad.neq) - {bad.pivot}, key=order.get)
        for w in choices:
            yield from bottoms(K - {w}, live, seen)

    def solve(rest: FrozenSet[Var]) -> Optional[List[FrozenSet[Var]]]:
        if not rest:
            return []
        if rest in memo:
            return memo[rest]
        memo[rest] = None
        live = [c for c in cl if c.vars() <= rest]
        for K in bottoms(rest, live, set()):
            tail = solve(rest - K)
            if tail is not None:
                memo[rest] = [K] + tail
                break
        return memo[rest]

    layers = solve(frozenset(vs))
    if layers is None:
        return None
    level = {v: i for i, K in enumerate(layers) for v in K}
    assert all(c.holds(level) for c in cl)
    return WeakOrder.from_ranks(vs, [level[v] for v in vs])
