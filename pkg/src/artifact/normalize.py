"""Rewriting formulas into the normal forms used by the product solver.

Pipeline: ``to_cnf`` removes full-tuple (dis)equalities and negations,
``reduce`` drops redundant clauses and literals, and ``normalize`` runs the
two mixed-dimension rewriting rules (strict/strict first, then
equality-or-disequality/strict) until neither applies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from . import synth
from .core import Clause, Cnf, Literal, Op, Regime, Relation, Var
from .oracle import DEFAULT_BUDGET, OracleBudget, oracle_implies, oracle_sat


class NormalizationCapExceeded(RuntimeError):
    """A rewriting phase hit its step cap or revisited a formula."""

    def __init__(self, phase: str, steps: int, cap: int, cycled: bool = False):
        what = "revisited an earlier formula" if cycled else "exceeded its cap"
        super().__init__("%s phase %s after %d steps (cap %d)" % (phase, what, steps, cap))
        self.phase = phase
        self.steps = steps
        self.cap = cap
        self.cycled = cycled


# -- R1-R4 ------------------------------------------------------------------

def _literal_cnf(l: Literal, dims: int) -> List[List[Literal]]:
    """CNF (list of clauses) of a single, possibly raw, literal."""
    op, x, y, neg = l.op, l.lhs, l.rhs, l.negated
    if op == Op.EQV:
        op, neg = (Op.NEQV, False) if neg else (Op.EQV, False)
    elif op == Op.NEQV:
        op, neg = (Op.EQV, False) if neg else (Op.NEQV, False)
    if op == Op.EQV:
        return [[Literal.make(Op.EQ, i, x, y)] for i in range(1, dims + 1)]
    if op == Op.NEQV:
        return [[Literal.make(Op.LT, i, a, b) for i in range(1, dims + 1)
                 for a, b in ((x, y), (y, x))]]
    d = l.dim
    if neg:
        op = {Op.LT: Op.LEQ, Op.LEQ: Op.LT, Op.EQ: Op.NEQ, Op.NEQ: Op.EQ}[op]
        if op in (Op.LEQ, Op.LT):
            x, y = y, x
    if op == Op.LT:
        return [[Literal.make(Op.LT, d, x, y)]]
    if op == Op.EQ:
        return [[Literal.make(Op.EQ, d, x, y)]]
    if op == Op.LEQ:
        return [[Literal.make(Op.LT, d, x, y), Literal.make(Op.EQ, d, y, x)]]
    return [[Literal.make(Op.LT, d, x, y), Literal.make(Op.LT, d, y, x)]]


def to_cnf(raw: Cnf) -> Cnf:
    """Equivalent CNF using only ``lt`` and ``eq`` atoms."""
    out: List[Clause] = []
    for c in raw.clauses:
        parts = [_literal_cnf(l, raw.dims) for l in c.literals]
        for combo in itertools.product(*parts):
            out.append(Clause.of(l for cl in combo for l in cl))
    return Cnf.make(out, raw.dims, raw.vars)


# -- reduction ----------------------------------------------------------------

def reduce(phi: Cnf, budget: OracleBudget = DEFAULT_BUDGET) -> Cnf:
    """Drop clauses, then literals, while equivalence is kept.

    Scans left to right in canonical order and restarts after each change.
    An unsatisfiable formula becomes the empty clause.
    """
    if oracle_sat(phi, budget) is None:
        return Cnf.bottom(phi.dims, phi.vars)
    cur = phi
    while True:
        cl = list(cur.clauses)
        nxt = None
        for i, c in enumerate(cl):
            rest = cur.with_clauses(cl[:i] + cl[i + 1:])
            if oracle_implies(rest, c, budget):
                nxt = rest
                break
        if nxt is None:
            for i, c in enumerate(cl):
                for l in c.literals:
                    c2 = c.without(l)
                    if oracle_implies(cur, c2, budget):
                        nxt = cur.with_clauses(cl[:i] + [c2] + cl[i + 1:])
                        break
                if nxt is not None:
                    break
        if nxt is None:
            return cur
        cur = nxt


# -- R5/R6 ------------------------------------------------------------------

@dataclass(frozen=True)
class Rewrite:
    rule: str          # "R5" or "R6"
    clause: Clause
    keep: Literal      # the u o_i v literal
    strict: Literal    # the x <_j y literal


def _side_condition(phi: Cnf, c: Clause, a: Literal, b: Literal, budget) -> bool:
    others = [x for x in phi.clauses if x != c]
    beta = [l for l in c.literals if l != a and l != b]
    premise = others + [Clause.of([l.negate()]) for l in beta] + [Clause.of([a])]
    target = Clause.of([Literal.make(Op.EQ, b.dim, b.lhs, b.rhs)])
    return oracle_implies(Cnf.make(premise, phi.dims, phi.vars), target, budget)


def find_rewrite(phi: Cnf, rule: str, budget: OracleBudget = DEFAULT_BUDGET) -> Optional[Rewrite]:
    """First applicable rewrite of the given rule in canonical order."""
    ops = (Op.LT,) if rule == "R5" else (Op.EQ, Op.NEQ)
    for c in phi.clauses:
        for a in c.literals:
            if a.op not in ops:
                continue
            for b in c.literals:
                if b is a or b.op != Op.LT or b.dim == a.dim:
                    continue
                if _side_condition(phi, c, a, b, budget):
                    return Rewrite(rule, c, a, b)
    return None


def apply_rewrite(phi: Cnf, rw: Rewrite) -> Cnf:
    b = rw.strict
    beta = [l for l in rw.clause.literals if l != rw.keep and l != b]
    c1 = Clause.of(beta + [b, Literal.make(Op.EQ, b.dim, b.lhs, b.rhs)])
    c2 = Clause.of(beta + [rw.keep, Literal.make(Op.NEQ, b.dim, b.lhs, b.rhs)])
    others = [x for x in phi.clauses if x != rw.clause]
    return phi.with_clauses(others + [c1, c2])


def literal_count(k: int, dims: int) -> int:
    """Distinct non-raw literals over ``k`` variables."""
    return dims * (2 * k * k + k * (k + 1))


def step_cap(phi: Cnf) -> int:
    """``f(l, k) * 2**l``: clauses of length at most ``l`` over ``k`` variables,
    times the per-clause bound."""
    ell = max((len(c) for c in phi.clauses), default=0)
    lits = literal_count(len(phi.vars), phi.dims)
    f = sum(comb(lits, j) for j in range(ell + 1))
    return f * 2 ** ell


@dataclass
class NormalizeStats:
    r5_steps: int = 0
    r6_steps: int = 0
    r5_cap: int = 0
    r6_cap: int = 0


def normalize_with_stats(phi: Cnf, budget: OracleBudget = DEFAULT_BUDGET,
                         max_steps: Optional[int] = None) -> Tuple[Cnf, NormalizeStats]:
    """R5 to exhaustion, then R6, re-reducing after every rewrite.

    ``max_steps`` optionally lowers the per-phase cap; revisiting a formula
    inside a phase is reported as non-termination straight away.
    """
    if phi.regime == Regime.RAW:
        raise ValueError("normalize needs lt/eq/leq/neq literals; apply to_cnf first")
    stats = NormalizeStats()
    cur = reduce(phi, budget)
    for rule in ("R5", "R6"):
        cap = step_cap(cur)
        if max_steps is not None:
            cap = min(cap, max_steps)
        setattr(stats, rule.lower() + "_cap", cap)
        seen = {cur}
        steps = 0
        while True:
            rw = find_rewrite(cur, rule, budget)
            if rw is None:
                break
            steps += 1
            setattr(stats, rule.lower() + "_steps", steps)
            if steps > cap:
                raise NormalizationCapExceeded(rule, steps, cap)
            cur = reduce(apply_rewrite(cur, rw), budget)
            if cur in seen:
                raise NormalizationCapExceeded(rule, steps, cap, cycled=True)
            seen.add(cur)
    return cur, stats


def normalize(phi: Cnf, budget: OracleBudget = DEFAULT_BUDGET) -> Cnf:
    return normalize_with_stats(phi, budget)[0]


def is_normal(phi: Cnf, budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    return find_rewrite(phi, "R5", budget) is None and find_rewrite(phi, "R6", budget) is None


# -- clause shapes --------------------------------------------------------------

@dataclass(frozen=True)
class ClauseKind:
    """``weakly[p]`` is the least set of other dimensions whose
    disequalities must be dropped to leave a ``p``-determined clause."""

    determined: FrozenSet[int]
    weakly: Mapping[int, FrozenSet[int]]

    def s_weakly(self, p: int, S: Iterable[int]) -> bool:
        return p in self.weakly and self.weakly[p] <= frozenset(S)


def classify_clause(c: Clause, dims: int) -> ClauseKind:
    ds = c.dims()
    determined = frozenset(range(1, dims + 1)) if not ds else (ds if len(ds) == 1 else frozenset())
    weakly: Dict[int, FrozenSet[int]] = {}
    for p in range(1, dims + 1):
        others = set()
        ok = True
        for l in c.literals:
            if l.dim == p:
                continue
            if l.op != Op.NEQ:
                ok = False
                break
            others.add(l.dim)
        if ok:
            weakly[p] = frozenset(others)
    return ClauseKind(frozenset(determined), weakly)


def is_s_determined(c: Clause, S: Iterable[int]) -> bool:
    return c.dims() <= frozenset(S)


def decompose(phi: Cnf, S: Iterable[int]) -> Tuple[Cnf, Dict[int, Cnf], Cnf]:
    """Split into S-determined clauses, S-weakly p-determined clauses per
    ``p`` outside S (smallest ``p`` wins), and the remainder."""
    S = frozenset(S)
    phis, rest = [], []
    per: Dict[int, List[Clause]] = {p: [] for p in range(1, phi.dims + 1) if p not in S}
    for c in phi.clauses:
        if c.literals and is_s_determined(c, S):
            phis.append(c)
            continue
        kind = classify_clause(c, phi.dims)
        for p in sorted(per):
            if kind.s_weakly(p, S) and c.literals:
                per[p].append(c)
                break
        else:
            rest.append(c)
    mk = phi.with_clauses
    return mk(phis), {p: mk(cs) for p, cs in per.items()}, mk(rest)


# -- hat / ve / cm -----------------------------------------------------------------

def hat(phi: Cnf, i: int) -> Cnf:
    """Drop the subscripts of an ``i``-determined formula."""
    out = []
    for c in phi.clauses:
        if any(l.dim != i for l in c.literals):
            raise ValueError("clause %s is not %d-determined" % (c, i))
        out.append(Clause.of(Literal.make(l.op, 1, l.lhs, l.rhs) for l in c.literals))
    return Cnf.make(out, 1, phi.vars)


def ve_name(v: Var, i: int) -> Var:
    return "%s^%d" % (v, i)


def ve(phi: Cnf, dims: Optional[Iterable[int]] = None) -> Cnf:
    """One-dimensional copy with a fresh variable ``x^i`` per variable and dimension."""
    ds = sorted(dims) if dims is not None else list(range(1, phi.dims + 1))
    out = []
    for c in phi.clauses:
        if any(l.dim not in ds for l in c.literals):
            raise ValueError("clause %s uses a dimension outside %s" % (c, ds))
        out.append(Clause.of(Literal.make(l.op, 1, ve_name(l.lhs, l.dim), ve_name(l.rhs, l.dim))
                             for l in c.literals))
    vs = [ve_name(v, i) for v in phi.vars for i in ds]
    return Cnf.make(out, 1, vs)


@dataclass(frozen=True)
class EqualitySet:
    """Pairs ``(x, y, i)`` whose ``i``-th coordinates are forced equal."""

    pairs: FrozenSet[Tuple[Var, Var, int]] = frozenset()

    @staticmethod
    def of(triples: Iterable[Tuple[Var, Var, int]]) -> "EqualitySet":
        return EqualitySet(frozenset((min(x, y), max(x, y), i) for x, y, i in triples))

    def __contains__(self, t) -> bool:
        x, y, i = t
        return x == y or (min(x, y), max(x, y), i) in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self):
        return len(self.pairs)


def cm(phi: Cnf, S: Iterable[int], E: EqualitySet, budget: Optional[OracleBudget] = None) -> Cnf:
    """Clause modification of the S-weakly determined part under ``E``.

    A clause whose S-disequalities are all forced false by ``E`` loses them
    (and the equalities are added); otherwise it shrinks to its first
    S-disequality not in ``E``.  With a budget the result is re-reduced.
    """
    S = frozenset(S)
    phis, per, rest = decompose(phi, S)
    if rest.clauses:
        raise ValueError("formula does not decompose for S=%s: %s" % (sorted(S), rest))
    out = list(phis.clauses)
    for p in sorted(per):
        for c in per[p].clauses:
            sneq = [l for l in c.literals if l.op == Op.NEQ and l.dim in S and l.dim != p]
            if not sneq:
                out.append(c)
                continue
            outside = [l for l in sneq if (l.lhs, l.rhs, l.dim) not in E]
            for l in sneq:
                if (l.lhs, l.rhs, l.dim) in E:
                    out.append(Clause.of([Literal.make(Op.EQ, l.dim, l.lhs, l.rhs)]))
            if outside:
                out.append(Clause.of([outside[0]]))
            else:
                out.append(Clause.of(l for l in c.literals if l not in sneq))
    res = phi.with_clauses(out)
    return reduce(res, budget) if budget is not None else res


def strongest_S_consequence(phi: Cnf, S: Iterable[int],
                            budget: OracleBudget = DEFAULT_BUDGET) -> Cnf:
    """Strongest S-determined formula implied by ``phi`` (its projection onto S)."""
    S = sorted(set(S))
    if not S:
        return Cnf.bottom(phi.dims, phi.vars) if oracle_sat(phi, budget) is None \
            else Cnf.top(phi.dims, phi.vars)
    space = synth.Space.of(phi, phi.vars, S, budget)
    res = synth.synthesize(space, [synth.any_template(S)])
    assert res.ok
    out = res.cnf(phi.dims, phi.vars)
    if not space.allowed.any():
        return Cnf.bottom(phi.dims, phi.vars)
    return out


# -- shape report ---------------------------------------------------------------

@dataclass
class ShapeCheck:
    name: str
    applicable: bool
    passed: bool
    detail: str = ""


@dataclass
class ShapeReport:
    relation: str
    checks: List[ShapeCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.applicable)


def shape_report(r: Relation, closures: Mapping[int, Set[str]],
                 budget: OracleBudget = DEFAULT_BUDGET) -> ShapeReport:
    """Check the clause-shape consequences of per-dimension closure facts.

    ``closures[i]`` names the families preserving ``r`` in dimension ``i``:
    ``"PP"``, ``"LL"``, ``"LEX"``, ``"MIN"`` and their duals ``"PP*"``, etc.
    ``r.definition`` is expected to be normal.
    """
    phi = r.definition
    n = r.dims
    dims = range(1, n + 1)
    fam = {i: set(closures.get(i, ())) for i in dims}
    good = {i for i in dims if fam[i] & {"PP", "LL", "PP*", "LL*"}}
    rep = ShapeReport(r.name)

    # no clause with strict literals of two dimensions
    hyp = len(good) >= n - 1 and n >= 2
    bad = [c for c in phi.clauses if len({l.dim for l in c.literals if l.op == Op.LT}) >= 2]
    rep.checks.append(ShapeCheck("ineq-mix", hyp, not (hyp and bad),
                                 str(bad[0]) if bad else ""))

    # every clause weakly i-determined for some i
    bad = [c for c in phi.clauses if not classify_clause(c, n).weakly]
    rep.checks.append(ShapeCheck("weakly-determined", hyp, not (hyp and bad),
                                 str(bad[0]) if bad else ""))

    def synth_check(name, hyp, templates):
        if not hyp:
            rep.checks.append(ShapeCheck(name, False, True))
            return
        space = synth.Space.of(phi, r.params, dims, budget)
        res = synth.synthesize(space, templates)
        detail = "" if res.ok else "orbit %s not excluded by any clause of the shape" % (
            {d: dict(sorted(o.items())) for d, o in res.uncovered.items()},)
        rep.checks.append(ShapeCheck(name, True, res.ok, detail))

    if n == 2:
        for p, q in ((1, 2), (2, 1)):
            synth_check("pp-shape-%d" % p, "PP" in fam[p],
                        [synth.any_template([q]), synth.min_template(p, [q])])
            synth_check("pp-ll-shape-%d" % p, "PP" in fam[p] and "LL" in fam[q],
                        [synth.ll_template(q, [q]), synth.min_template(p, [q])])
        synth_check("ll-both", "LL" in fam[1] and "LL" in fam[2],
                    [synth.ll_template(j, dims) for j in dims])
    S = [i for i in dims if "LL" in fam[i]]
    hyp = all("PP" in fam[p] and "LEX" not in fam[p] for p in dims if p not in S)
    synth_check("strong-syntax", hyp,
                [synth.ll_template(p, S) for p in S] +
                [synth.min_template(p, S) for p in dims if p not in S])
    return rep
