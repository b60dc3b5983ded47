"""Brute-force ground truth over weak-order tuples.

Every question is answered by enumerating weak orders.  A clause can mix
dimensions, so for each dimension we record which clauses each weak order
satisfies (a bit mask); an assignment is a model when the masks of its
per-dimension orders cover every clause.
"""

from __future__ import annotations

import functools
import itertools
from math import comb
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .core import Clause, Cnf, Solution, Var, WeakOrder

HARD_MAX_VARS = 9
HARD_MAX_DIMS = 4
# largest number of kept-orbit combinations enumerated in one projection
HARD_MAX_COMBOS = 2_000_000


class BudgetExceeded(RuntimeError):
    pass


class RawLiteralError(ValueError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_vars: int = 8
    max_dims: int = 3

    def __post_init__(self):
        if not 0 <= self.max_vars <= HARD_MAX_VARS:
            raise ValueError("max_vars must be within 0..%d" % HARD_MAX_VARS)
        if not 1 <= self.max_dims <= HARD_MAX_DIMS:
            raise ValueError("max_dims must be within 1..%d" % HARD_MAX_DIMS)


DEFAULT_BUDGET = OracleBudget()


def fubini(k: int) -> int:
    """Number of weak orders on k items."""
    a = [1]
    for n in range(1, k + 1):
        a.append(sum(comb(n, j) * a[n - j] for j in range(1, n + 1)))
    return a[k]


@functools.lru_cache(maxsize=None)
def table(k: int) -> np.ndarray:
    """Rank rows of all weak orders on k items (read-only, cached)."""
    t = np.asarray(kernels.weak_order_table(k), dtype=np.int8)
    t.setflags(write=False)
    return t


@functools.lru_cache(maxsize=None)
def row_lookup(k: int) -> np.ndarray:
    """Map from the base-k code of a rank row to its row index (-1 if none)."""
    t = table(k).astype(np.int64)
    base = max(k, 1)
    codes = (t * (base ** np.arange(k))).sum(axis=1) if k else np.zeros(1, dtype=np.int64)
    out = np.full(base ** k, -1, dtype=np.int64)
    out[codes] = np.arange(len(t))
    return out


def dense_ranks(rows: np.ndarray) -> np.ndarray:
    """Renumber each row's values to consecutive levels from 0."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.shape[1] == 0:
        return rows
    hi = int(rows.max()) + 1
    present = np.zeros((rows.shape[0], hi), dtype=np.int64)
    np.put_along_axis(present, rows, 1, axis=1)
    cum = np.cumsum(present, axis=1) - 1
    return np.take_along_axis(cum, rows, axis=1)


def row_index(rows: np.ndarray) -> np.ndarray:
    """Row indices (into ``table(k)``) of rank rows, after dense renumbering."""
    rows = dense_ranks(rows)
    k = rows.shape[1]
    if k == 0:
        return np.zeros(rows.shape[0], dtype=np.int64)
    codes = (rows * (k ** np.arange(k))).sum(axis=1)
    return row_lookup(k)[codes]


def enumerate_weak_orders(vars: Sequence[Var],
                          budget: OracleBudget = DEFAULT_BUDGET) -> Iterator[WeakOrder]:
    vs = list(vars)
    if len(vs) > budget.max_vars:
        raise BudgetExceeded("%d variables exceed the budget of %d" % (len(vs), budget.max_vars))
    for row in table(len(vs)):
        yield WeakOrder.from_ranks(vs, row)


# -- per-dimension clause masks --------------------------------------------

def _check(phi: Cnf, budget: OracleBudget) -> None:
    if phi.dims > budget.max_dims:
        raise BudgetExceeded("%d dimensions exceed the budget of %d" % (phi.dims, budget.max_dims))
    for l in phi.literals():
        if l.raw:
            raise RawLiteralError("raw literal %s: apply to_cnf first" % (l,))


def _dim_vars(phi: Cnf, d: int, first: Sequence[Var] = ()) -> List[Var]:
    used = set()
    for l in phi.literals():
        if l.dim == d:
            used.add(l.lhs)
            used.add(l.rhs)
    out = list(first)
    out.extend(v for v in phi.vars if v in used and v not in first)
    out.extend(sorted(v for v in used if v not in out))
    return out


@dataclass
class _Dim:
    vars: List[Var]
    packed: np.ndarray  # rows x bytes, clause truth packed big-endian


def _dim_data(phi: Cnf, d: int, budget: OracleBudget, first: Sequence[Var] = ()) -> _Dim:
    vs = _dim_vars(phi, d, first)
    if len(vs) > budget.max_vars:
        raise BudgetExceeded("%d variables in dimension %d exceed the budget of %d"
                             % (len(vs), d, budget.max_vars))
    idx = {v: i for i, v in enumerate(vs)}
    ops, lhs, rhs, ptr = [], [], [], [0]
    for c in phi.clauses:
        for l in c.literals:
            if l.dim == d:
                ops.append(int(l.op))
                lhs.append(idx[l.lhs])
                rhs.append(idx[l.rhs])
        ptr.append(len(ops))
    tab = table(len(vs))
    truth = kernels.clause_truth(tab, np.array(ops, dtype=np.int8), np.array(lhs, dtype=np.int32),
                                 np.array(rhs, dtype=np.int32), np.array(ptr, dtype=np.int32))
    return _Dim(vs, np.packbits(np.asarray(truth, dtype=np.uint8), axis=1))


def _full_mask(m: int) -> int:
    if m == 0:
        return 0
    return int.from_bytes(np.packbits(np.ones(m, dtype=np.uint8)).tobytes(), "big")


def _to_int(b: np.ndarray) -> int:
    return int.from_bytes(b.tobytes(), "big")


def _maximal(masks: Iterable[int]) -> List[int]:
    ms = sorted(set(masks), key=lambda x: -bin(x).count("1"))
    if len(ms) > 400:
        return ms
    kept: List[int] = []
    for m in ms:
        if not any(m | k == k for k in kept):
            kept.append(m)
    return kept


def _distinct(packed: np.ndarray) -> Tuple[List[int], List[int]]:
    """Distinct masks with the first row realizing each."""
    if packed.shape[1] == 0:
        return [0], [0]
    uniq, first = np.unique(packed, axis=0, return_index=True)
    order = np.argsort(first)
    return [_to_int(uniq[i]) for i in order], [int(first[i]) for i in order]


def oracle_sat(phi: Cnf, budget: OracleBudget = DEFAULT_BUDGET) -> Optional[Solution]:
    """A model of ``phi`` with consecutive integer levels, or None."""
    _check(phi, budget)
    if phi.is_bottom:
        return None
    m = len(phi.clauses)
    full = _full_mask(m)
    dims = [_dim_data(phi, d, budget) for d in range(1, phi.dims + 1)]
    states: Dict[int, Tuple[int, ...]] = {0: ()}
    for dd in dims:
        masks, reps = _distinct(dd.packed)
        new: Dict[int, Tuple[int, ...]] = {}
        for s, w in states.items():
            for mk, r in zip(masks, reps):
                t = s | mk
                if t not in new:
                    new[t] = w + (r,)
        keep = _maximal(new)
        states = {k: new[k] for k in keep}
    if full not in states:
        return None
    rows = states[full]
    emb = {v: [0] * phi.dims for v in phi.vars}
    for d, (dd, r) in enumerate(zip(dims, rows)):
        ranks = table(len(dd.vars))[r]
        for v, k in zip(dd.vars, ranks):
            emb[v][d] = int(k)
    sol = Solution.from_embedding({v: tuple(t) for v, t in emb.items()}, phi.dims)
    assert phi.evaluate(sol.embedding), "oracle witness fails re-evaluation"
    return sol


def negate_clause(c: Clause, dims: int, vars: Sequence[Var]) -> Cnf:
    return Cnf.make((Clause.of([l.negate()]) for l in c.literals), dims, vars)


def oracle_implies(phi: Cnf, c: Clause, budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """True iff every model of ``phi`` satisfies ``c``."""
    vs = list(phi.vars) + sorted(c.vars() - set(phi.vars))
    neg = negate_clause(c, max(phi.dims, max(c.dims(), default=1)), vs)
    return oracle_sat(Cnf.make(phi.clauses + neg.clauses, neg.dims, vs), budget) is None


# -- projections -------------------------------------------------------------

@dataclass(frozen=True)
class Projection:
    """Kept orbits of a formula: ``allowed[i1,...,ik]`` for row indices into
    ``table(len(vars))`` in each kept dimension."""

    vars: Tuple[Var, ...]
    dims: Tuple[int, ...]
    allowed: np.ndarray

    def orbits(self) -> List[Tuple[int, ...]]:
        return [tuple(int(x) for x in t) for t in np.argwhere(self.allowed)]


def project(phi: Cnf, keep_vars: Sequence[Var], keep_dims: Iterable[int],
            budget: OracleBudget = DEFAULT_BUDGET) -> Projection:
    """Orbits over ``keep_vars`` in ``keep_dims`` that extend to a model.

    Variables outside ``keep_vars`` and all other dimensions are quantified
    existentially.
    """
    _check(phi, budget)
    keep_vars = list(keep_vars)
    kd = sorted(set(keep_dims))
    f = len(keep_vars)
    if f > budget.max_vars:
        raise BudgetExceeded("%d kept variables exceed the budget" % f)
    nrows = len(table(f))
    shape = (nrows,) * len(kd)
    if nrows ** len(kd) > HARD_MAX_COMBOS:
        raise BudgetExceeded("projection onto %d orbits per dimension over %d dimensions "
                             "is too large" % (nrows, len(kd)))
    if phi.is_bottom:
        return Projection(tuple(keep_vars), tuple(kd), np.zeros(shape, dtype=bool))
    m = len(phi.clauses)
    full = _full_mask(m)
    nb = (m + 7) // 8
    full_bytes = np.frombuffer(full.to_bytes(nb, "big"), dtype=np.uint8) if nb else None
    other: List[int] = [0]
    kept: List[Tuple[np.ndarray, np.ndarray]] = []
    for d in range(1, phi.dims + 1):
        if d in kd:
            dd = _dim_data(phi, d, budget, keep_vars)
            grp = row_index(table(len(dd.vars))[:, :f])
            kept.append((grp, dd.packed))
        else:
            dd = _dim_data(phi, d, budget)
            masks, _ = _distinct(dd.packed)
            other = _maximal(a | b for a in other for b in masks)
    if m == 0:
        return Projection(tuple(keep_vars), tuple(kd), np.ones(shape, dtype=bool))
    if not kd:
        return Projection(tuple(keep_vars), (), np.array(full in other))

    def last_dim(cur: List[int], grp, packed) -> np.ndarray:
        ok = np.zeros(len(packed), dtype=bool)
        for c in cur:
            cb = np.frombuffer(c.to_bytes(nb, "big"), dtype=np.uint8)
            ok |= np.all((packed | cb) == full_bytes, axis=1)
        return np.bincount(grp[ok], minlength=nrows) > 0

    # per-group distinct masks for all kept dims but the last
    groups: List[List[List[int]]] = []
    for grp, packed in kept[:-1]:
        per: List[set] = [set() for _ in range(nrows)]
        for g, row in zip(grp.tolist(), packed):
            per[g].add(_to_int(row))
        groups.append([_maximal(s) for s in per])
    out = np.zeros(shape, dtype=bool)
    grp_last, packed_last = kept[-1]
    for combo in itertools.product(range(nrows), repeat=len(kd) - 1):
        cur = other
        for g, per in zip(combo, groups):
            cur = _maximal(a | b for a in cur for b in per[g])
        out[combo] = last_dim(cur, grp_last, packed_last)
    return Projection(tuple(keep_vars), tuple(kd), out)


def orbit_table(phi: Cnf, vars: Sequence[Var], budget: OracleBudget = DEFAULT_BUDGET) -> Projection:
    """All satisfying orbit tuples over ``vars`` in every dimension."""
    return project(phi, vars, range(1, phi.dims + 1), budget)


def oracle_equiv_pp(matrix: Cnf, exist_vars: Sequence[Var], psi: Cnf, free_vars: Sequence[Var],
                    budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """Does ``exists exist_vars . matrix`` define the same relation as ``psi``?"""
    free = list(free_vars)
    allv = set(free) | set(exist_vars)
    if len(allv) > budget.max_vars:
        raise BudgetExceeded("%d variables exceed the budget of %d" % (len(allv), budget.max_vars))
    stray = (set(matrix.vars) - allv) | (set(psi.vars) - set(free))
    if stray:
        raise ValueError("unquantified variables %s" % sorted(stray))
    n = max(matrix.dims, psi.dims)
    a = project(Cnf.make(matrix.clauses, n, matrix.vars), free, range(1, n + 1), budget)
    b = project(Cnf.make(psi.clauses, n, psi.vars), free, range(1, n + 1), budget)
    return bool(np.array_equal(a.allowed, b.allowed))
