"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Both modules expose the same functions with the same results; the
compiled one is picked at import time when available.
"""

from __future__ import annotations

import numpy as np

OP_LT, OP_LEQ, OP_EQ, OP_NEQ = 0, 1, 2, 3


def weak_order_table(k: int) -> np.ndarray:
    """All weak orders of ``k`` items as rank rows, by block insertion.

    Row order: item ``j`` is inserted into each row for ``j-1`` items at the
    positions new-block-below-0, block 0, new block between 0 and 1, ...
    """
    tab = np.zeros((1, 0), dtype=np.int8)
    for j in range(k):
        m = (tab.max(axis=1) + 1) if j else np.zeros(1, dtype=np.int64)
        counts = 2 * m.astype(np.int64) + 1
        rep = np.repeat(np.arange(len(tab)), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        pos = np.arange(len(rep)) - starts
        g = pos // 2
        base = tab[rep].astype(np.int64)
        even = (pos % 2) == 0
        base = base + (even[:, None] & (base >= g[:, None]))
        tab = np.concatenate([base, g[:, None]], axis=1).astype(np.int8)
    return np.ascontiguousarray(tab)


def clause_truth(table, ops, lhs, rhs, ptr) -> np.ndarray:
    """Truth of each clause (literals ``ptr[c]:ptr[c+1]``) on each row."""
    table = np.asarray(table)
    rows = table.shape[0]
    m = len(ptr) - 1
    out = np.zeros((rows, m), dtype=np.uint8)
    for c in range(m):
        acc = np.zeros(rows, dtype=bool)
        for t in range(ptr[c], ptr[c + 1]):
            a = table[:, lhs[t]]
            b = table[:, rhs[t]]
            op = ops[t]
            if op == OP_LT:
                acc |= a < b
            elif op == OP_LEQ:
                acc |= a <= b
            elif op == OP_EQ:
                acc |= a == b
            else:
                acc |= a != b
        out[:, c] = acc
    return out


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def ll_horn_solve(nvars, neq_ptr, neq_a, neq_b, head, zmask, tail):
    """Decide a set of ll-Horn clauses; return integer levels or None.

    Clause ``c`` reads: some pair ``neq_a[t] != neq_b[t]`` (for ``t`` in
    ``neq_ptr[c]:neq_ptr[c+1]``), or some ``z < head[c]`` for ``z`` in the bit
    set ``zmask[c]``, or (when ``tail[c]``) all of them equal to the head.
    ``head[c] < 0`` means the clause has only disequalities.

    The solution returned is injective outside the forced equalities.
    """
    nc = len(head)
    parent = list(range(nvars))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    while True:
        cls = [find(v) for v in range(nvars)]
        ph, pz, pt = [], [], []
        for c in range(nc):
            active = True
            for t in range(neq_ptr[c], neq_ptr[c + 1]):
                if cls[neq_a[t]] != cls[neq_b[t]]:
                    active = False
                    break
            if not active:
                continue
            if head[c] < 0:
                return None
            h = cls[head[c]]
            z = 0
            for v in _bits(int(zmask[c])):
                if cls[v] != h:
                    z |= 1 << cls[v]
            if z == 0:
                if tail[c]:
                    continue
                return None
            ph.append(h)
            pz.append(z)
            pt.append(bool(tail[c]))
        remaining = 0
        for v in range(nvars):
            remaining |= 1 << cls[v]
        alive = [True] * len(ph)
        level_of = {}
        lvl = 0
        merged = False
        while remaining:
            forb = 0
            for c in range(len(ph)):
                if alive[c] and not pt[c]:
                    forb |= 1 << ph[c]
            best, bestsz = 0, 65
            for x in _bits(remaining):
                m = 1 << x
                changed = True
                while changed:
                    changed = False
                    for c in range(len(ph)):
                        if alive[c] and pt[c] and (m >> ph[c]) & 1 and (pz[c] & ~m):
                            m |= pz[c]
                            changed = True
                if m & forb:
                    continue
                sz = bin(m).count("1")
                if sz < bestsz:
                    best, bestsz = m, sz
            if not best:
                return None
            members = list(_bits(best))
            for v in members:
                level_of[v] = lvl
            if bestsz > 1:
                r0 = find(members[0])
                for v in members[1:]:
                    parent[find(v)] = r0
                merged = True
            for c in range(len(ph)):
                if alive[c] and ((best >> ph[c]) & 1 or pz[c] & best):
                    alive[c] = False
            remaining &= ~best
            lvl += 1
        if not merged:
            return np.array([level_of[cls[v]] for v in range(nvars)], dtype=np.int32)


def _canonical(perm, s) -> bool:
    for q in range(len(perm)):
        img = sorted(int(perm[q][x]) for x in s)
        if img < list(s):
            return False
    return True


def canonical_subsets(perm, max_size: int) -> np.ndarray:
    """Subsets of size <= max_size (up to 3), one per orbit of the group."""
    if max_size > 3:
        raise ValueError("max_size <= 3")
    perm = np.asarray(perm)
    F = perm.shape[1]
    out = [()]
    singles = [a for a in range(F) if _canonical(perm, (a,))] if max_size >= 1 else []
    out.extend((a,) for a in singles)
    pairs = []
    if max_size >= 2:
        pairs = [(a, b) for a in singles for b in range(a + 1, F) if _canonical(perm, (a, b))]
        out.extend(pairs)
    if max_size >= 3:
        for a, b in pairs:
            out.extend((a, b, c) for c in range(b + 1, F) if _canonical(perm, (a, b, c)))
    arr = np.full((len(out), 3), -1, dtype=np.int16)
    for i, s in enumerate(out):
        arr[i, :len(s)] = s
    return arr


def ll_horn_grid_scan(subsets, neq_ptr, neq_a, neq_b, head, zmask, tail,
                      truth, pair_vars, pair_truth, code_row, nvars):
    """Reference version of the compiled grid scan (slow)."""
    to_int = lambda w: int(w[0]) | (int(w[1]) << 64)
    ftruth = [to_int(w) for w in truth]
    ptruth = [to_int(w) for w in pair_truth]
    full = (1 << 128) - 1
    n_sat = n_dis = n_eq = n_wit = n_pc = 0
    failures = []

    def row_of(lev):
        code = sum(int(lev[j]) * nvars ** j for j in range(nvars))
        return int(code_row[code])

    for i, s in enumerate(np.asarray(subsets)):
        forms = [int(f) for f in s if f >= 0]
        ptr, A, B, H, Z, T = [0], [], [], [], [], []
        mask = full
        for f in forms:
            for t in range(neq_ptr[f], neq_ptr[f + 1]):
                A.append(int(neq_a[t]))
                B.append(int(neq_b[t]))
            ptr.append(len(A))
            H.append(int(head[f]))
            Z.append(int(zmask[f]))
            T.append(int(tail[f]))
            mask &= ftruth[f]
        osat = mask != 0
        lev = ll_horn_solve(nvars, ptr, A, B, H, Z, T)
        ok = True
        if osat != (lev is not None):
            n_dis += 1
            ok = False
        if osat and lev is not None:
            n_sat += 1
            r = row_of(lev)
            if r < 0 or not (mask >> r) & 1:
                n_wit += 1
                ok = False
            in_e = []
            for q, (a, b) in enumerate(pair_vars):
                e = ll_horn_solve(nvars, ptr + [len(A) + 1], A + [int(a)], B + [int(b)],
                                  H + [-1], Z + [0], T + [0]) is None
                n_pc += 1
                in_e.append(e)
                if e != ((mask & ptruth[q]) == 0):
                    n_eq += 1
                    ok = False
            p2, A2, B2, H2, Z2, T2 = list(ptr), list(A), list(B), list(H), list(Z), list(T)
            for q, (a, b) in enumerate(pair_vars):
                if not in_e[q]:
                    A2.append(int(a))
                    B2.append(int(b))
                    p2.append(len(A2))
                    H2.append(-1)
                    Z2.append(0)
                    T2.append(0)
            lev = ll_horn_solve(nvars, p2, A2, B2, H2, Z2, T2)
            if lev is None:
                n_wit += 1
                ok = False
            else:
                r = row_of(lev)
                if r < 0 or not (mask >> r) & 1:
                    n_wit += 1
                    ok = False
                for q, (a, b) in enumerate(pair_vars):
                    if not in_e[q] and lev[a] == lev[b]:
                        n_wit += 1
                        ok = False
        if not ok and len(failures) < 20:
            failures.append(i)
    return {"instances": len(subsets), "sat": n_sat, "disagreements": n_dis,
            "equality_mismatches": n_eq, "witness_failures": n_wit,
            "pair_checks": n_pc, "failures": failures}
