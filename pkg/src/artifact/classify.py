"""Preservation tests for order-canonical binary operations, and verdicts.

Every family used here (pp, ll, lex, twisted lex, projections) is fixed by
comparisons of the two arguments and, for pp and ll, the position of 0
among the first argument's values.  So a relation's preservation is decided
by trying all pairs of its orbits and all threshold positions.  Binary
min and max also need the relative order of the two arguments, which we
enumerate as merged weak orders.

In a product, an operation acts on every dimension.  To certify that dimension
``p`` admits an operation of family ``F`` we look for "filler"
operations for the other dimensions making the whole tuple a polymorphism.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import oracle, synth
from .core import Cnf, Op, Regime, Relation, dual_relation
from .normalize import to_cnf
from .oracle import DEFAULT_BUDGET, BudgetExceeded, OracleBudget

MAX_PAIRS = 30_000_000
CHUNK = 250_000


class Family(enum.Enum):
    PP = "pp"
    LL = "ll"
    LEX = "lex"
    TWISTED_LEX = "tlex"
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class OpFamily:
    kind: Family
    dualized: bool = False

    @property
    def name(self) -> str:
        return self.kind.name + ("*" if self.dualized else "")

    @staticmethod
    def parse(s: str) -> "OpFamily":
        dual = s.endswith("*")
        return OpFamily(Family[s.rstrip("*").upper()], dual)


ALL_FAMILIES = [OpFamily(k, d) for k in Family for d in (False, True)]
THRESHOLD_KINDS = ("pp", "ll")
FILLERS = ("p1", "lex", "p2", "lexba", "ll")


class InconsistencyError(AssertionError):
    """Two independent routes disagree; always a bug."""


# -- operation keys -----------------------------------------------------------------

def _keys(kind: str, a: np.ndarray, b: np.ndarray, c: int, K: int) -> np.ndarray:
    """Sort keys of ``f(a, b)`` for ranks below ``K``; ``a <= 0`` iff ``rank(a) < c``."""
    a = a.astype(np.int64)
    b = b.astype(np.int64)
    if kind == "p1":
        return a
    if kind == "p2":
        return b
    if kind == "lex":
        return a * K + b
    if kind == "lexba":
        return b * K + a
    if kind == "tlex":
        return a * K + (K - 1 - b)
    low = a < c
    if kind == "pp":
        return np.where(low, a, K + b)
    if kind == "ll":
        return np.where(low, a * K + b, K * K + b * K + a)
    raise ValueError(kind)


def concrete(kind: str, a: int, b: int) -> int:
    """A concrete member of each family, on integers (0 is the threshold)."""
    if kind == "p1":
        return a
    if kind == "p2":
        return b
    if kind == "lex":
        return a * 1000 + b
    if kind == "lexba":
        return b * 1000 + a
    if kind == "tlex":
        return a * 1000 - b
    if kind == "pp":
        return a if a <= 0 else 1000 + b
    if kind == "ll":
        return (-10 ** 6 + a * 1000 + b) if a <= 0 else (10 ** 6 + b * 1000 + a)
    if kind == "min":
        return min(a, b)
    if kind == "max":
        return max(a, b)
    raise ValueError(kind)


# -- orbit data -------------------------------------------------------------------------

MAX_CELLS = 5_000_000
MAX_MERGE_VARS = 8


@dataclass
class Orbits:
    """Allowed orbits, one weak-order row per dimension.

    Dimension ``d`` only ranks the variables some ``d``-literal mentions;
    the other coordinates are unconstrained there.
    """

    relation: Relation
    dvars: List[List[int]]       # per dim, indices into params
    allowed: np.ndarray
    cells: np.ndarray            # (N, n) row indices
    ranks: List[np.ndarray]      # per dim, (N, k_d)


def _lit_vec(l, tab: np.ndarray, pos: Dict[str, int]) -> np.ndarray:
    a = tab[:, pos[l.lhs]]
    b = tab[:, pos[l.rhs]]
    return {Op.LT: a < b, Op.LEQ: a <= b, Op.EQ: a == b, Op.NEQ: a != b}[l.op]


def orbits_of(r: Relation, budget: OracleBudget = DEFAULT_BUDGET) -> Orbits:
    phi = r.definition
    if phi.regime == Regime.RAW:
        phi = to_cnf(phi)
    n = r.dims
    if n > budget.max_dims:
        raise BudgetExceeded("%d dimensions exceed the budget of %d" % (n, budget.max_dims))
    lits = list(phi.literals())
    dvars = []
    for d in range(1, n + 1):
        used = {v for l in lits if l.dim == d for v in (l.lhs, l.rhs)}
        dvars.append([i for i, v in enumerate(r.params) if v in used])
        if len(dvars[-1]) > budget.max_vars:
            raise BudgetExceeded("%d variables in dimension %d exceed the budget of %d"
                                 % (len(dvars[-1]), d, budget.max_vars))
    tabs = [oracle.table(len(dv)) for dv in dvars]
    shape = tuple(len(t) for t in tabs)
    if int(np.prod(shape)) > MAX_CELLS:
        raise BudgetExceeded("%d orbits exceed the preservation budget" % int(np.prod(shape)))
    pos = [{r.params[i]: j for j, i in enumerate(dv)} for dv in dvars]
    allowed = np.ones(shape, dtype=bool)
    for c in phi.clauses:
        acc = np.zeros(shape, dtype=bool)
        for d in range(n):
            ls = [l for l in c.literals if l.dim == d + 1]
            if not ls:
                continue
            v = np.zeros(shape[d], dtype=bool)
            for l in ls:
                v |= _lit_vec(l, tabs[d], pos[d])
            sh = [1] * n
            sh[d] = shape[d]
            acc |= v.reshape(sh)
        allowed &= acc
    cells = np.argwhere(allowed)
    return Orbits(r, dvars, allowed, cells, [tabs[d][cells[:, d]] for d in range(n)])


@functools.lru_cache(maxsize=None)
def _merge_table(k: int, kind: str) -> Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray]]:
    """For weak orders a, b of k items: output rows of min/max over all
    merges, with a joint rank row realizing each."""
    J = oracle.table(2 * k).astype(np.int64)
    a = oracle.row_index(J[:, :k])
    b = oracle.row_index(J[:, k:])
    f = np.minimum if kind == "min" else np.maximum
    o = oracle.row_index(f(J[:, :k], J[:, k:]))
    trip = np.stack([a, b, o], axis=1)
    uniq, first = np.unique(trip, axis=0, return_index=True)
    out: Dict[Tuple[int, int], List] = {}
    for (x, y, z), i in zip(uniq.tolist(), first.tolist()):
        out.setdefault((x, y), []).append((z, i))
    return {key: (np.array([z for z, _ in v]), J[[i for _, i in v]]) for key, v in out.items()}


# -- results ----------------------------------------------------------------------

@dataclass
class Counterexample:
    """Two members of the relation whose image is not a member."""

    relation: Relation
    ops: Tuple[str, ...]
    s: Dict[str, Tuple[int, ...]]
    t: Dict[str, Tuple[int, ...]]
    image: Dict[str, Tuple[int, ...]]

    def verify(self) -> bool:
        """Recompute the image with concrete operations and recheck membership."""
        phi = self.relation.definition
        img = {v: tuple(concrete(op, self.s[v][d], self.t[v][d]) for d, op in enumerate(self.ops))
               for v in self.s}
        return (phi.evaluate(self.s) and phi.evaluate(self.t) and not phi.evaluate(img)
                and img == self.image)


@dataclass
class Preservation:
    family: OpFamily
    holds: bool
    ops: Optional[Tuple[str, ...]] = None   # the certified operation tuple per dimension
    counterexample: Optional[Counterexample] = None


def _points(orb: Orbits, i: int, j: int, ops, cs, joint=None, pdim=None):
    """Concrete points for orbit pair (i, j) under thresholds ``cs``."""
    s, t = {}, {}
    for gi, v in enumerate(orb.relation.params):
        sv, tv = [], []
        for d, op in enumerate(ops):
            dv = orb.dvars[d]
            if gi not in dv:
                sv.append(0)
                tv.append(0)
                continue
            idx = dv.index(gi)
            if d == pdim:
                sv.append(int(joint[idx]))
                tv.append(int(joint[len(dv) + idx]))
            else:
                a = int(orb.ranks[d][i, idx])
                sv.append(a - cs[d] + 1 if op in THRESHOLD_KINDS else a)
                tv.append(int(orb.ranks[d][j, idx]))
        s[v] = tuple(sv)
        t[v] = tuple(tv)
    img = {v: tuple(concrete(op, s[v][d], t[v][d]) for d, op in enumerate(ops)) for v in s}
    return s, t, img


def _check_ops(orb: Orbits, ops: Tuple[str, ...]) -> Optional[Counterexample]:
    """None if the operation tuple preserves the relation, else a counterexample."""
    n = len(ops)
    N = len(orb.cells)
    ks = [len(dv) for dv in orb.dvars]
    if N * N > MAX_PAIRS:
        raise BudgetExceeded("%d orbit pairs exceed the preservation budget" % (N * N))
    if N == 0:
        return None
    special = [d for d, op in enumerate(ops) if op in ("min", "max")]
    if len(special) > 1:
        raise ValueError("at most one min/max dimension")
    thr_dims = [d for d, op in enumerate(ops) if op in THRESHOLD_KINDS]
    ranges = [range(ks[d] + 1) if d in thr_dims else range(1) for d in range(n)]

    def cex(i, j, cs, joint=None, pdim=None):
        s, t, img = _points(orb, i, j, ops, cs, joint, pdim)
        c = Counterexample(orb.relation, ops, s, t, img)
        if not c.verify():
            raise InconsistencyError("counterexample for %s under %s does not re-verify"
                                     % (orb.relation.name, ops))
        return c

    if not special:
        for cs in itertools.product(*ranges):
            for start in range(0, N * N, CHUNK):
                flat = np.arange(start, min(N * N, start + CHUNK))
                I, Jx = flat // N, flat % N
                idx = []
                for d, op in enumerate(ops):
                    key = _keys(op, orb.ranks[d][I], orb.ranks[d][Jx], cs[d], ks[d] + 1)
                    idx.append(oracle.row_index(key))
                ok = orb.allowed[tuple(idx)]
                if not ok.all():
                    bad = int(np.flatnonzero(~ok)[0])
                    return cex(int(I[bad]), int(Jx[bad]), cs)
        return None

    p = special[0]
    if 2 * ks[p] > MAX_MERGE_VARS:
        raise BudgetExceeded("%s preservation needs merged orders of %d variables" % (ops[p], 2 * ks[p]))
    table = _merge_table(ks[p], ops[p])
    groups: Dict[int, np.ndarray] = {}
    for r in np.unique(orb.cells[:, p]).tolist():
        groups[r] = np.flatnonzero(orb.cells[:, p] == r)
    for cs in itertools.product(*ranges):
        for ra, gi in groups.items():
            for rb, gj in groups.items():
                outs, joints = table[(ra, rb)]
                I = np.repeat(gi, len(gj))
                Jx = np.tile(gj, len(gi))
                idx = []
                for d, op in enumerate(ops):
                    if d == p:
                        idx.append(None)
                    else:
                        idx.append(oracle.row_index(_keys(op, orb.ranks[d][I], orb.ranks[d][Jx], cs[d], ks[d] + 1)))
                for o, joint in zip(outs.tolist(), joints):
                    full = tuple(np.full(len(I), o) if x is None else x for x in idx)
                    ok = orb.allowed[full]
                    if not ok.all():
                        bad = int(np.flatnonzero(~ok)[0])
                        return cex(int(I[bad]), int(Jx[bad]), cs, joint, p)
    return None


def _target_op(fam: Family) -> str:
    return {Family.PP: "pp", Family.LL: "ll", Family.LEX: "lex", Family.TWISTED_LEX: "tlex",
            Family.MIN: "min", Family.MAX: "max"}[fam]


def _flip(r: Relation, dims: Iterable[int]) -> Relation:
    for d in dims:
        r = dual_relation(r, d)
    return r


def check_preservation_all(relations: Sequence[Relation], dim: int, fam: OpFamily,
                           budget: OracleBudget = DEFAULT_BUDGET) -> Preservation:
    """Is there one operation tuple, of family ``fam`` in ``dim``, preserving every relation?

    Other dimensions try the fillers in a fixed order; the first tuple
    that works for all relations certifies the family.
    """
    if not relations:
        return Preservation(fam, True, None)
    n = relations[0].dims
    if not 1 <= dim <= n:
        raise ValueError("dimension %d out of range 1..%d" % (dim, n))
    rels = [dual_relation(r, dim) if fam.dualized else r for r in relations]
    orbs = [orbits_of(r, budget) for r in rels]
    target = _target_op(fam.kind)
    others = [d for d in range(n) if d != dim - 1]
    first_cex = None
    for fill in itertools.product(FILLERS, repeat=len(others)):
        ops = [None] * n
        ops[dim - 1] = target
        for d, f in zip(others, fill):
            ops[d] = f
        ops = tuple(ops)
        bad = None
        for orb in orbs:
            bad = _check_ops(orb, ops)
            if bad is not None:
                break
        if bad is None:
            return Preservation(fam, True, ops)
        if first_cex is None:
            first_cex = bad
    return Preservation(fam, False, None, first_cex)


def check_preservation(r: Relation, dim: int, fam: OpFamily,
                       budget: OracleBudget = DEFAULT_BUDGET) -> Preservation:
    return check_preservation_all([r], dim, fam, budget)


def check_ops(r: Relation, ops: Sequence[str], budget: OracleBudget = DEFAULT_BUDGET
              ) -> Optional[Counterexample]:
    """Counterexample for one explicit operation tuple, or None if it preserves ``r``."""
    return _check_ops(orbits_of(r, budget), tuple(ops))


# -- closure facts ----------------------------------------------------------------

@dataclass
class ClosureFacts:
    per_dim: Dict[int, Dict[str, Preservation]] = field(default_factory=dict)

    def holds(self, dim: int, name: str) -> bool:
        p = self.per_dim.get(dim, {}).get(name)
        return bool(p and p.holds)

    def names(self, dim: int) -> set:
        return {k for k, v in self.per_dim.get(dim, {}).items() if v.holds}

    def as_sets(self) -> Dict[int, set]:
        return {d: self.names(d) for d in self.per_dim}


def closure_facts(relations: Sequence[Relation], families: Iterable[OpFamily] = ALL_FAMILIES,
                  budget: OracleBudget = DEFAULT_BUDGET) -> ClosureFacts:
    families = list(families)
    n = relations[0].dims if relations else 1
    facts = ClosureFacts()
    for d in range(1, n + 1):
        facts.per_dim[d] = {f.name: check_preservation_all(relations, d, f, budget)
                            for f in families}
    return facts


# -- Ord-Horn ------------------------------------------------------------------------

@dataclass
class OrdHornResult:
    ord_horn: bool
    witness: Optional[Cnf] = None
    counterexample: Optional[Counterexample] = None


def is_ord_horn(r: Relation, budget: OracleBudget = DEFAULT_BUDGET) -> OrdHornResult:
    """Preservation by ll (and its dual) acting on all coordinates, plus a definition.

    On the flattened relation an ll-operation acts in every dimension at
    once, with a threshold per dimension (the relation does not relate
    coordinates of different dimensions).
    """
    n = r.dims
    ops = ("ll",) * n
    cex = check_ops(r, ops, budget)
    if cex is None:
        cex = check_ops(_flip(r, range(1, n + 1)), ops, budget)
    space = synth.Space.of(r.definition, r.params, range(1, n + 1), budget)
    res = synth.synthesize(space, [synth.ord_horn_template(range(1, n + 1))])
    if res.ok != (cex is None):
        raise InconsistencyError("%s: ll preservation says %s but Ord-Horn synthesis says %s"
                                 % (r.name, cex is None, res.ok))
    if not res.ok:
        return OrdHornResult(False, None, cex)
    w = res.cnf(n, r.params)
    if not oracle.oracle_equiv_pp(w, [], r.definition, r.params, budget):
        raise InconsistencyError("synthesized Ord-Horn definition of %s is not equivalent" % r.name)
    return OrdHornResult(True, w)


@dataclass
class BinaryVerdict:
    tractable: bool
    witnesses: Dict[str, Cnf]
    offenders: List[str]

    @property
    def label(self) -> str:
        return "P" if self.tractable else "NP-COMPLETE"


def classify_binary_expansion(relations: Sequence[Relation], group: int = 1,
                              budget: OracleBudget = DEFAULT_BUDGET) -> BinaryVerdict:
    """P iff every relation is Ord-Horn.

    ``group`` is the number of point variables per element (2 for
    intervals and rectangles encoded by endpoints), so relations must have
    arity ``2 * group``.
    """
    witnesses, offenders = {}, []
    for r in relations:
        if r.arity != 2 * group:
            raise ValueError("relation %s has arity %d, expected %d" % (r.name, r.arity, 2 * group))
        res = is_ord_horn(r, budget)
        if res.ord_horn:
            witnesses[r.name] = res.witness
        else:
            offenders.append(r.name)
    return BinaryVerdict(not offenders, witnesses, offenders)


class ProfileVerdict(enum.Enum):
    TRACTABLE = "tractable"
    HARD_IF_BINARY = "hard-if-binary"
    INCONCLUSIVE = "inconclusive"


@dataclass
class Profile:
    facts: ClosureFacts
    verdict: ProfileVerdict
    offenders: List[str] = field(default_factory=list)


def good_dimension(names: set) -> bool:
    return ("LL" in names or "LL*" in names or {"PP", "MIN"} <= names
            or {"PP*", "MIN*"} <= names)


def dimension_profile(relations: Sequence[Relation],
                      budget: OracleBudget = DEFAULT_BUDGET) -> Profile:
    relations = list(relations)
    if not relations:
        return Profile(ClosureFacts(), ProfileVerdict.TRACTABLE)
    facts = closure_facts(relations, budget=budget)
    if all(good_dimension(facts.names(d)) for d in facts.per_dim):
        return Profile(facts, ProfileVerdict.TRACTABLE)
    binary = [r for r in relations if r.arity == 2]
    offenders = [r.name for r in binary if not is_ord_horn(r, budget).ord_horn]
    if offenders:
        return Profile(facts, ProfileVerdict.HARD_IF_BINARY, offenders)
    return Profile(facts, ProfileVerdict.INCONCLUSIVE)
