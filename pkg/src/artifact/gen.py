"""Seeded random formulas and instances, and the exhaustive small clause grids.

Random output depends only on the seed (``random.Random``), so generated
files are byte-identical across runs.  The grids enumerate clause sets of
at most three clauses up to renaming of the variables; their size is
cross-checked by counting orbits with Burnside's lemma.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels, oracle
from .core import Clause, Cnf, Instance, Literal, Op, Relation, Var
from .sexpr import cnf_to_sexpr, instance_to_text, relations_to_text
from .temporal import LlHornClause, MinFormClause

BASE_OPS = (Op.LT, Op.EQ)
SHAPE_OPS = (Op.LT, Op.LEQ, Op.EQ, Op.NEQ)


def var_names(n: int) -> List[Var]:
    base = "xyzuvwabcdefgh"
    return [base[i] if i < len(base) else "v%d" % i for i in range(n)]


def random_literal(rng: random.Random, vars: Sequence[Var], dims: int, ops=BASE_OPS) -> Literal:
    x, y = rng.sample(list(vars), 2)
    return Literal.make(rng.choice(ops), rng.randint(1, dims), x, y)


def random_clause(rng: random.Random, vars, dims: int, max_len: int = 3, ops=BASE_OPS) -> Clause:
    return Clause.of(random_literal(rng, vars, dims, ops) for _ in range(rng.randint(1, max_len)))


def random_cnf(rng: random.Random, nvars: int, nclauses: int, dims: int,
               ops=BASE_OPS, max_len: int = 3) -> Cnf:
    vs = var_names(max(nvars, 2))
    cls = [random_clause(rng, vs, dims, max_len, ops) for _ in range(rng.randint(1, nclauses))]
    return Cnf.make(cls, dims, vs)


# clause shapes that tend to stay inside the tractable kernel
def _shaped_clause(rng: random.Random, vs, dims: int) -> Clause:
    d = rng.randint(1, dims)
    kind = rng.randrange(6) if len(vs) > 2 else rng.randrange(5)
    pick = lambda k: rng.sample(list(vs), k) if len(vs) >= k else rng.choices(list(vs), k=k)
    if kind == 0:
        x, y = pick(2)
        return Clause.of([Literal.make(rng.choice(SHAPE_OPS), d, x, y)])
    if kind == 1:
        x, y = pick(2)
        z, w = pick(2)
        return Clause.of([Literal.make(Op.NEQ, d, x, y), Literal.make(Op.LEQ, d, z, w)])
    if kind == 2:
        x, y, z = pick(3)
        return Clause.of([Literal.make(Op.LT, d, y, x), Literal.make(Op.LT, d, z, x)])
    if kind == 5:
        # min-closed but not ll-Horn, possibly guarded by disequalities elsewhere
        x, y, z = pick(3)
        if rng.random() < 0.3:
            lits = [Literal.make(Op.LEQ, d, x, y), Literal.make(Op.LEQ, d, x, z)]
        else:
            lits = [Literal.make(Op.LEQ, d, y, x), Literal.make(Op.LEQ, d, z, x)]
        if dims > 1 and rng.random() < 0.5:
            e = rng.choice([i for i in range(1, dims + 1) if i != d])
            u, v = pick(2)
            lits.append(Literal.make(Op.NEQ, e, u, v))
        return Clause.of(lits)
    # disequalities elsewhere, min-form core in d
    x, y, z = pick(3)
    lits = [Literal.make(Op.LEQ, d, z, x)]
    if rng.random() < 0.5:
        lits.append(Literal.make(Op.NEQ, d, y, x))
    for _ in range(rng.randint(1, 2)):
        e = rng.randint(1, dims)
        u, v = pick(2)
        lits.append(Literal.make(Op.NEQ, e, u, v))
    return Clause.of(lits)


def random_relation(rng: random.Random, name: str, arity: int, dims: int, nclauses: int,
                    shaped: bool = True) -> Relation:
    vs = var_names(arity)
    if shaped:
        cls = [_shaped_clause(rng, vs, dims) for _ in range(rng.randint(1, nclauses))]
    else:
        cls = [random_clause(rng, vs, dims, 3, SHAPE_OPS) for _ in range(rng.randint(1, nclauses))]
    cls = [c for c in cls if not any(l.lhs == l.rhs for l in c.literals)]
    return Relation.define(name, vs, Cnf.make(cls, dims, vs))


def random_instance(rng: random.Random, relations: Sequence[Relation], nvars: int,
                    ncons: int) -> Instance:
    vs = ["a%d" % i for i in range(nvars)]
    cons = []
    for _ in range(rng.randint(1, ncons)):
        r = rng.choice(list(relations))
        cons.append((r.name, tuple(rng.choice(vs) for _ in range(r.arity))))
    return Instance(tuple(vs), tuple(cons), {r.name: r for r in relations})


def rewrite_prone_cnf(rng: random.Random, nvars: int, dims: int) -> Cnf:
    """BASE formula of at most three clauses planting the cross-dimension
    pattern the R5/R6 rewrites look for: ``(a | x <_j y | ...)`` next to a
    clause saying ``not a`` or ``x =_j y``."""
    vs = var_names(max(nvars, 2))
    i, j = rng.sample(range(1, dims + 1), 2) if dims > 1 else (1, 1)
    u, v = rng.sample(vs, 2)
    x, y = rng.sample(vs, 2)
    op = rng.choice(BASE_OPS)
    a = Literal.make(op, i, u, v)
    first = [a, Literal.make(Op.LT, j, x, y)]
    if rng.random() < 0.3:
        first.append(random_literal(rng, vs, dims))
    if op == Op.LT:
        not_a = [Literal.make(Op.LT, i, v, u), Literal.make(Op.EQ, i, u, v)]
    else:
        not_a = [Literal.make(Op.LT, i, u, v), Literal.make(Op.LT, i, v, u)]
    cls = [Clause.of(first), Clause.of(not_a + [Literal.make(Op.EQ, j, x, y)])]
    if rng.random() < 0.5:
        cls.append(random_clause(rng, vs, dims, 2))
    return Cnf.make(cls, dims, vs)


def corpus_text(seed: int, count: int, nvars: int = 4, nclauses: int = 3, dims: int = 2,
                prone: float = 0.0) -> str:
    """``count`` random BASE formulas as ``(formula TAG F)`` entries; a
    ``prone`` fraction of them come from :func:`rewrite_prone_cnf`."""
    rng = random.Random(seed)
    lines = ["(dims %d)" % dims]
    for i in range(count):
        if rng.random() < prone and dims > 1 and nclauses >= 3:
            phi = rewrite_prone_cnf(rng, nvars, dims)
        else:
            phi = random_cnf(rng, nvars, nclauses, dims)
        lines.append("(formula f%d %s)" % (i, cnf_to_sexpr(phi)))
    return "\n".join(lines) + "\n"


def instances_text(seed: int, relations: Sequence[Relation], nvars: int, ncons: int) -> str:
    rng = random.Random(seed)
    inst = random_instance(rng, relations, nvars, ncons)
    return relations_to_text(list(relations)) + instance_to_text(inst)


# -- exhaustive grids --------------------------------------------------------------------

GRID_VARS = ("a", "b", "c", "d")


def _pairs(vs):
    return list(itertools.combinations(vs, 2))


def ll_horn_space(vars: Sequence[Var] = GRID_VARS, max_neq: int = 2, max_strict: int = 2
                  ) -> List[LlHornClause]:
    """Every ll-Horn clause with at most ``max_neq`` disequalities and ``max_strict``
    strict disjuncts (the always-true tail without strict part is left out)."""
    neqs = [()]
    for m in range(1, max_neq + 1):
        neqs += list(itertools.combinations(_pairs(vars), m))
    heads: List[Tuple[Tuple[Var, ...], Optional[Var], bool]] = [((), None, False)]
    for h in vars:
        others = [v for v in vars if v != h]
        for l in range(1, max_strict + 1):
            for zs in itertools.combinations(others, l):
                heads += [(zs, h, False), (zs, h, True)]
    return [LlHornClause(n, zs, h, t) for n in neqs for zs, h, t in heads]


def min_form_space(vars: Sequence[Var] = GRID_VARS, max_neq: int = 2, max_leq: int = 2
                   ) -> List[MinFormClause]:
    out = [MinFormClause(vars[0])]        # the empty clause, once
    for x in vars:
        others = [v for v in vars if v != x]
        subs = lambda k: [s for m in range(k + 1) for s in itertools.combinations(others, m)]
        for ys in subs(max_neq):
            for zs in subs(max_leq):
                if ys or zs:
                    out.append(MinFormClause(x, ys, zs))
    return out


def _canon(c):
    if isinstance(c, LlHornClause):
        return (tuple(sorted(tuple(sorted(p)) for p in c.neq)), tuple(sorted(c.strict)), c.head, c.tail)
    return (c.pivot, tuple(sorted(c.neq)), tuple(sorted(c.leq)))


def renaming_action(clauses: Sequence, vars: Sequence[Var] = GRID_VARS) -> np.ndarray:
    """``perm[g, f]``: index of clause ``f`` renamed by the ``g``-th permutation."""
    index = {_canon(c): i for i, c in enumerate(clauses)}
    rows = []
    for p in itertools.permutations(vars):
        m = dict(zip(vars, p))
        rows.append([index[_canon(c.rename(m))] if not _is_empty(c) else i
                     for i, c in enumerate(clauses)])
    return np.array(rows, dtype=np.int32)


def _is_empty(c) -> bool:
    return isinstance(c, MinFormClause) and not c.neq and not c.leq


def burnside_count(perm: np.ndarray, max_size: int) -> int:
    """Orbits of subsets of size <= max_size, from the cycle types of the action."""
    total = 0
    for row in perm:
        seen = np.zeros(len(row), dtype=bool)
        lens = []
        for s in range(len(row)):
            if seen[s]:
                continue
            n, x = 0, s
            while not seen[x]:
                seen[x] = True
                x = row[x]
                n += 1
            lens.append(n)
        # coefficient of t^j in prod (1 + t^len)
        poly = np.zeros(max_size + 1, dtype=object)
        poly[0] = 1
        for L in lens:
            if L > max_size:
                continue
            nxt = poly.copy()
            nxt[L:] += poly[:max_size + 1 - L]
            poly = nxt
        total += int(sum(poly))
    assert total % len(perm) == 0
    return total // len(perm)


@dataclass
class Grid:
    clauses: list
    perm: np.ndarray
    subsets: np.ndarray          # (N, 3) clause indices, -1 padded

    def clause_sets(self):
        for row in self.subsets:
            yield [self.clauses[f] for f in row if f >= 0]


def make_grid(clauses: list, max_size: int = 3) -> Grid:
    perm = renaming_action(clauses)
    subs = kernels.canonical_subsets(perm, max_size)
    return Grid(clauses, perm, np.asarray(subs))


def ll_horn_grid(max_size: int = 3) -> Grid:
    return make_grid(ll_horn_space(), max_size)


def min_form_grid(max_size: int = 3) -> Grid:
    return make_grid(min_form_space(), max_size)


def truth_bits(clauses: Sequence, vars: Sequence[Var] = GRID_VARS) -> np.ndarray:
    """(F, rows) truth table of each clause on every weak order, by its own semantics."""
    tab = oracle.table(len(vars))
    out = np.zeros((len(clauses), len(tab)), dtype=bool)
    for r, row in enumerate(tab):
        level = dict(zip(vars, (int(x) for x in row)))
        for f, c in enumerate(clauses):
            out[f, r] = c.holds(level)
    return out


def _words(bits: np.ndarray) -> np.ndarray:
    """Pack rows of at most 128 booleans into two uint64 words."""
    out = np.zeros((bits.shape[0], 2), dtype=np.uint64)
    for j in range(bits.shape[1]):
        w, b = divmod(j, 64)
        out[:, w] |= bits[:, j].astype(np.uint64) << np.uint64(b)
    return out


def scan_ll_horn_grid(grid: Grid, vars: Sequence[Var] = GRID_VARS) -> Dict[str, object]:
    """Run the solver, equality set and witness checks over the whole grid."""
    idx = {v: i for i, v in enumerate(vars)}
    ptr, a, b, head, zm, tail = [0], [], [], [], [], []
    for c in grid.clauses:
        for x, y in c.neq:
            a.append(idx[x])
            b.append(idx[y])
        ptr.append(len(a))
        head.append(-1 if c.head is None else idx[c.head])
        zm.append(sum(1 << idx[z] for z in c.strict))
        tail.append(int(c.tail))
    truth = _words(truth_bits(grid.clauses, vars))
    tab = oracle.table(len(vars))
    pairs = _pairs(range(len(vars)))
    pair_truth = _words(np.array([tab[:, i] != tab[:, j] for i, j in pairs]))
    k = len(vars)
    codes = (tab.astype(np.int64) * (k ** np.arange(k))).sum(axis=1)
    code_row = np.full(k ** k, -1, dtype=np.int32)
    code_row[codes] = np.arange(len(tab))
    return kernels.ll_horn_grid_scan(grid.subsets, ptr, a, b, head, zm, tail, truth,
                                     np.array(pairs, dtype=np.int32), pair_truth, code_row, k)


def min_closed_sets(grid: Grid, vars: Sequence[Var] = GRID_VARS) -> np.ndarray:
    """For each clause set: is its solution set closed under binary minimum?"""
    from .classify import _merge_table
    k = len(vars)
    tab = oracle.table(k)
    R = len(tab)
    M = np.zeros((R * R, R), dtype=np.float32)
    for (ra, rb), (outs, _) in _merge_table(k, "min").items():
        M[ra * R + rb, outs] = 1.0
    truth = truth_bits(grid.clauses, vars)
    out = np.zeros(len(grid.subsets), dtype=bool)
    step = 2000
    for s in range(0, len(grid.subsets), step):
        rows = grid.subsets[s:s + step]
        A = np.ones((len(rows), R), dtype=bool)
        for j in range(rows.shape[1]):
            f = rows[:, j]
            m = f >= 0
            A[m] &= truth[f[m]]
        pairs = (A[:, :, None] & A[:, None, :]).reshape(len(rows), R * R).astype(np.float32)
        reach = pairs @ M
        out[s:s + step] = ~((reach > 0) & ~A).any(axis=1)
    return out


def allowed_rows(clauses: Sequence, vars: Sequence[Var]) -> np.ndarray:
    """Rows of the weak-order table satisfying all clauses (the brute-force oracle)."""
    bits = truth_bits(clauses, vars)
    return bits.all(axis=0) if len(clauses) else np.ones(bits.shape[1], dtype=bool)


def random_ll_horn(rng: random.Random, vars: Sequence[Var], nclauses: int,
                   max_neq: int = 2, max_strict: int = 3) -> List[LlHornClause]:
    out = []
    for _ in range(rng.randint(1, nclauses)):
        neq = tuple(tuple(rng.sample(list(vars), 2)) for _ in range(rng.randint(0, max_neq)))
        if rng.random() < 0.15:
            if not neq:
                neq = (tuple(rng.sample(list(vars), 2)),)
            out.append(LlHornClause(neq))
            continue
        h = rng.choice(list(vars))
        others = [v for v in vars if v != h]
        zs = tuple(rng.sample(others, rng.randint(1, min(max_strict, len(others)))))
        out.append(LlHornClause(neq, zs, h, rng.random() < 0.5))
    return out


def scan_min_form_grid(grid: Grid, vars: Sequence[Var] = GRID_VARS) -> Dict[str, object]:
    """Solver against the truth-table oracle on every set of the min-form grid.

    Witnesses are checked on all sets; satisfiability is compared on the
    MIN-closed ones.  Disagreements elsewhere are counted separately.
    """
    from .temporal import solve_min_form
    truth = truth_bits(grid.clauses, vars)
    closed = min_closed_sets(grid, vars)
    stats = {"instances": 0, "min_closed": int(closed.sum()), "sat": 0, "disagreements": 0,
             "witness_failures": 0, "open_disagreements": 0, "failures": []}
    for i, row in enumerate(grid.subsets):
        fs = [int(f) for f in row if f >= 0]
        cl = [grid.clauses[f] for f in fs]
        w = solve_min_form(cl, vars=vars)
        expect = bool(truth[fs].all(axis=0).any()) if fs else True
        stats["instances"] += 1
        if w is not None:
            stats["sat"] += 1
            level = w.rank()
            if not all(c.holds(level) for c in cl):
                stats["witness_failures"] += 1
                stats["failures"].append(i)
        if (w is not None) != expect:
            key = "disagreements" if closed[i] else "open_disagreements"
            stats[key] += 1
            if closed[i]:
                stats["failures"].append(i)
    return stats
