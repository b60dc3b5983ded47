"""Finding definitions of a required clause shape for a finite orbit set.

A relation over ``k`` variables in a set of dimensions is a boolean tensor
indexed by one weak-order row per dimension.  Every clause that excludes
an orbit ``t`` uses only literals that are false at ``t``, so for each
clause shape there are few maximal candidates per orbit; we pick implied
ones greedily until every excluded orbit is covered.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import oracle
from .core import Clause, Cnf, Literal, Op, Var


@dataclass(frozen=True)
class Tail:
    """The conjunction ``head = m1 = ... = mk`` in one dimension."""

    dim: int
    head: Var
    members: Tuple[Var, ...]

    def literals(self) -> List[Literal]:
        return [Literal.make(Op.EQ, self.dim, self.head, m) for m in self.members]

    def rename(self, m) -> "Tail":
        return Tail(self.dim, m.get(self.head, self.head), tuple(m.get(z, z) for z in self.members))

    def __str__(self) -> str:
        return "(eq* %d %s %s)" % (self.dim, self.head, " ".join(self.members))


Atom = Union[Literal, Tail]
Candidate = List[Tuple[Atom, bool]]   # (atom, removable)


def atoms_to_clauses(atoms: Sequence[Atom]) -> List[Clause]:
    """CNF of a disjunction whose disjuncts may be equality chains."""
    lits = [a for a in atoms if isinstance(a, Literal)]
    tails = [a for a in atoms if isinstance(a, Tail)]
    if not tails:
        return [Clause.of(lits)]
    out = []
    for choice in itertools.product(*(t.literals() for t in tails)):
        out.append(Clause.of(lits + list(choice)))
    return out


class Space:
    """Allowed orbits of ``vars`` over ``dims``: ``allowed[r_1, ..., r_m]``."""

    def __init__(self, vars: Sequence[Var], dims: Sequence[int], allowed: np.ndarray):
        self.vars = tuple(vars)
        self.dims = tuple(dims)
        self.allowed = np.asarray(allowed, dtype=bool)
        self.k = len(self.vars)
        self.tab = oracle.table(self.k)
        self.axis = {d: a for a, d in enumerate(self.dims)}
        self.idx = {v: i for i, v in enumerate(self.vars)}
        self._lit: Dict[Tuple, np.ndarray] = {}

    @staticmethod
    def of(phi: Cnf, vars: Sequence[Var], dims: Iterable[int],
           budget: oracle.OracleBudget = oracle.DEFAULT_BUDGET) -> "Space":
        p = oracle.project(phi, vars, dims, budget)
        return Space(p.vars, p.dims, p.allowed)

    @property
    def shape(self):
        return self.allowed.shape

    def _vec(self, op: Op, x: Var, y: Var) -> np.ndarray:
        key = (op, x, y)
        v = self._lit.get(key)
        if v is None:
            a = self.tab[:, self.idx[x]]
            b = self.tab[:, self.idx[y]]
            v = {Op.LT: a < b, Op.LEQ: a <= b, Op.EQ: a == b, Op.NEQ: a != b}[op]
            self._lit[key] = v
        return v

    def falsified(self, atoms: Sequence[Atom]) -> np.ndarray:
        """Tensor of orbits where the disjunction is false."""
        per: Dict[int, np.ndarray] = {}
        for a in atoms:
            if isinstance(a, Tail):
                v = np.ones(len(self.tab), dtype=bool)
                for m in a.members:
                    v &= self._vec(Op.EQ, a.head, m)
            else:
                v = self._vec(a.op, a.lhs, a.rhs)
            ax = self.axis[a.dim]
            per[ax] = per[ax] | v if ax in per else v
        out = np.ones(self.shape, dtype=bool)
        for ax, v in per.items():
            sh = [1] * len(self.dims)
            sh[ax] = len(v)
            out &= ~v.reshape(sh)
        return out

    def implied(self, atoms: Sequence[Atom]) -> bool:
        return not (self.allowed & self.falsified(atoms)).any()

    def ranks(self, cell: Tuple[int, ...]) -> Dict[int, Dict[Var, int]]:
        return {d: dict(zip(self.vars, (int(r) for r in self.tab[cell[self.axis[d]]])))
                for d in self.dims}

    def cell_of(self, orbit: Dict[int, Dict[Var, int]]) -> Tuple[int, ...]:
        out = []
        for d in self.dims:
            row = np.array([[orbit[d][v] for v in self.vars]])
            out.append(int(oracle.row_index(row)[0]))
        return tuple(out)


# -- candidate templates ------------------------------------------------------

Template = Callable[[Space, Dict[int, Dict[Var, int]]], List[Candidate]]


def _pairs(vs):
    return itertools.combinations(vs, 2)


def neq_part(space: Space, r, dims: Iterable[int]) -> Candidate:
    out: Candidate = []
    for d in sorted(dims):
        for x, y in _pairs(space.vars):
            if r[d][x] == r[d][y]:
                out.append((Literal.make(Op.NEQ, d, x, y), True))
    return out


def any_template(core_dims: Iterable[int]) -> Template:
    """Unrestricted clauses over ``core_dims``."""
    core_dims = sorted(core_dims)

    def gen(space, r):
        c: Candidate = []
        for d in core_dims:
            for x, y in _pairs(space.vars):
                if r[d][x] < r[d][y]:
                    c.append((Literal.make(Op.LEQ, d, y, x), True))
                elif r[d][x] > r[d][y]:
                    c.append((Literal.make(Op.LEQ, d, x, y), True))
                else:
                    c.append((Literal.make(Op.NEQ, d, x, y), True))
        return [c]
    gen.strengthen = True
    return gen


def min_template(p: int, neq_dims: Iterable[int] = ()) -> Template:
    """``N or y_1 !=_p x or ... or z_1 <=_p x or ...`` with ``N`` disequalities in ``neq_dims``."""
    nd = [d for d in neq_dims if d != p]

    def gen(space, r):
        base = neq_part(space, r, nd)
        out = [list(base)]
        for x in space.vars:
            c = list(base)
            for y in space.vars:
                if y == x:
                    continue
                if r[p][y] == r[p][x]:
                    c.append((Literal.make(Op.NEQ, p, y, x), True))
                elif r[p][y] > r[p][x]:
                    c.append((Literal.make(Op.LEQ, p, y, x), True))
            out.append(c)
        return out
    return gen


def ll_template(p: int, neq_dims: Iterable[int] = ()) -> Template:
    """ll-Horn clauses with head in dimension ``p``; disequalities in ``neq_dims`` and ``p``."""
    nd = sorted(set(neq_dims) | {p})

    def gen(space, r):
        base = neq_part(space, r, nd)
        out = [list(base)]
        for z0 in space.vars:
            g = [z for z in space.vars if r[p][z] > r[p][z0]]
            if not g:
                continue
            out.append(base + [(Literal.make(Op.LT, p, z, z0), True) for z in g])
            for size in range(1, len(g) + 1):
                for zs in itertools.combinations(g, size):
                    out.append(base + [(Literal.make(Op.LT, p, z, z0), False) for z in zs]
                               + [(Tail(p, z0, zs), False)])
        return out
    return gen


def ord_horn_template(dims: Iterable[int]) -> Template:
    """Disequalities plus at most one ``<=`` literal."""
    dims = sorted(dims)

    def gen(space, r):
        base = neq_part(space, r, dims)
        out = [list(base)]
        for d in dims:
            for a in space.vars:
                for b in space.vars:
                    if r[d][a] > r[d][b]:
                        out.append(base + [(Literal.make(Op.LEQ, d, a, b), True)])
        return out
    return gen


# -- search -------------------------------------------------------------------

@dataclass
class SynthResult:
    ok: bool
    clauses: List[Tuple[Atom, ...]]
    uncovered: Optional[Dict[int, Dict[Var, int]]] = None  # an orbit no clause excludes

    def cnf(self, dims: int, vars: Sequence[Var]) -> Cnf:
        out: List[Clause] = []
        for atoms in self.clauses:
            out.extend(atoms_to_clauses(atoms))
        return Cnf.make(out, dims, vars)


_STRONGER = {Op.LEQ: lambda l: [Literal.make(Op.LT, l.dim, l.lhs, l.rhs)],
             Op.NEQ: lambda l: [Literal.make(Op.LT, l.dim, l.lhs, l.rhs),
                                Literal.make(Op.LT, l.dim, l.rhs, l.lhs)]}


def _shrink(space: Space, cand: Candidate, strengthen: bool) -> List[Atom]:
    atoms = list(cand)
    i = 0
    while i < len(atoms):
        a, removable = atoms[i]
        if removable:
            trial = [x for j, (x, _) in enumerate(atoms) if j != i]
            if space.implied(trial):
                del atoms[i]
                continue
        i += 1
    out = [a for a, _ in atoms]
    if strengthen:
        for i, a in enumerate(out):
            if isinstance(a, Literal) and a.op in _STRONGER:
                for s in _STRONGER[a.op](a):
                    trial = out[:i] + [s] + out[i + 1:]
                    if space.implied(trial):
                        out = trial
                        break
    return out


def synthesize(space: Space, templates: Sequence[Template]) -> SynthResult:
    """Cover every excluded orbit by an implied clause from the templates."""
    allowed = space.allowed
    uncovered = ~allowed
    chosen: List[Tuple[List[Atom], np.ndarray]] = []
    while True:
        flat = np.flatnonzero(uncovered)
        if not flat.size:
            break
        cell = np.unravel_index(int(flat[0]), space.shape)
        r = space.ranks(tuple(int(c) for c in cell))
        best = None
        seen = set()
        for tmpl in templates:
            strengthen = getattr(tmpl, "strengthen", False)
            for cand in tmpl(space, r):
                atoms = [a for a, _ in cand]
                if not space.implied(atoms):
                    continue
                atoms = _shrink(space, cand, strengthen)
                key = tuple(sorted(map(str, atoms)))
                if key in seen:
                    continue
                seen.add(key)
                fals = space.falsified(atoms)
                gain = int((uncovered & fals).sum())
                if best is None or gain > best[0]:
                    best = (gain, atoms, fals)
        if best is None:
            return SynthResult(False, [tuple(a) for a, _ in chosen], r)
        chosen.append((best[1], best[2]))
        uncovered &= ~best[2]
    # drop clauses whose excluded orbits are all excluded by others
    count = np.zeros(space.shape, dtype=np.int32)
    for _, f in chosen:
        count += f
    kept = []
    for atoms, f in chosen:
        if (count[f] >= 2).all():
            count -= f
        else:
            kept.append(tuple(atoms))
    return SynthResult(True, kept)


def defines(space: Space, clauses: Sequence[Sequence[Atom]]) -> bool:
    """Do the clauses carve out exactly the allowed orbits?"""
    excl = np.zeros(space.shape, dtype=bool)
    for atoms in clauses:
        excl |= space.falsified(atoms)
    return bool(np.array_equal(~excl, space.allowed))
