"""Shared helpers, including a brute-force reference that shares no code with
``artifact.oracle``: it evaluates formulas on every integer assignment with
coordinates in ``0..k-1``, which reaches every order type of ``k`` variables."""

from pathlib import Path

import numpy as np
import pytest

from artifact.core import Cnf, Op
from artifact.sexpr import formula_from_string

DATA = Path(__file__).resolve().parents[1] / "src" / "artifact" / "data"


def F(text, dims=2, vars=None) -> Cnf:
    return formula_from_string(text, dims, vars)


def grid_points(vars, dims):
    """Coordinate arrays ``{v: [dim arrays]}`` over all assignments into 0..k-1."""
    k = max(len(vars), 1)
    cols = len(vars) * dims
    N = k ** cols
    if N > 2_000_000:
        pytest.skip("integer grid too large")
    idx = np.arange(N)
    coords = []
    for _ in range(cols):
        coords.append(idx % k)
        idx = idx // k
    return {v: [coords[i * dims + d] for d in range(dims)] for i, v in enumerate(vars)}


def grid_truth(phi: Cnf, vars=None, dims=None) -> np.ndarray:
    vars = list(vars if vars is not None else phi.vars)
    dims = dims or phi.dims
    pts = grid_points(vars, dims)
    N = len(pts[vars[0]][0]) if vars else 1
    out = np.ones(N, dtype=bool)
    for c in phi.clauses:
        acc = np.zeros(N, dtype=bool)
        for l in c.literals:
            a, b = pts[l.lhs], pts[l.rhs]
            if l.op in (Op.EQV, Op.NEQV):
                v = np.ones(N, dtype=bool)
                for d in range(dims):
                    v &= a[d] == b[d]
                v = v if l.op == Op.EQV else ~v
            else:
                x, y = a[l.dim - 1], b[l.dim - 1]
                v = {Op.LT: x < y, Op.LEQ: x <= y, Op.EQ: x == y, Op.NEQ: x != y}[l.op]
            acc |= v != l.negated
        out &= acc
    return out


def grid_sat(phi: Cnf) -> bool:
    if phi.is_bottom:
        return False
    if not phi.vars:
        return not phi.clauses
    return bool(grid_truth(phi).any())


def grid_equiv(a: Cnf, b: Cnf, vars=None) -> bool:
    vs = list(vars or dict.fromkeys(list(a.vars) + list(b.vars)))
    dims = max(a.dims, b.dims)
    if not vs:
        return (not a.is_bottom and not a.clauses) == (not b.is_bottom and not b.clauses)
    return bool(np.array_equal(grid_truth(a, vs, dims), grid_truth(b, vs, dims)))


def fubini_reference(n: int) -> int:
    """Ordered set partitions by the recurrence a(n) = sum C(n,k) a(n-k)."""
    from math import comb
    a = [1]
    for m in range(1, n + 1):
        a.append(sum(comb(m, k) * a[m - k] for k in range(1, m + 1)))
    return a[n]
