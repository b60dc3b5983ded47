# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: weak-order tables, clause truth tables, the ll-Horn
solver and the exhaustive ll-Horn grid scan.

``_kernels_py`` holds the reference versions of the first three.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int8_t, int32_t, int16_t, uint8_t
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF MAXV = 64


def weak_order_table(int k):
    cdef Py_ssize_t rows = 1, total, r, j, pos, c, i
    cdef int m, g
    cdef cnp.ndarray[int8_t, ndim=2] tab = np.zeros((1, 0), dtype=np.int8)
    cdef cnp.ndarray[int8_t, ndim=2] nxt
    for j in range(k):
        total = 0
        for r in range(rows):
            m = 0
            for c in range(j):
                if tab[r, c] + 1 > m:
                    m = tab[r, c] + 1
            total += 2 * m + 1
        nxt = np.empty((total, j + 1), dtype=np.int8)
        i = 0
        for r in range(rows):
            m = 0
            for c in range(j):
                if tab[r, c] + 1 > m:
                    m = tab[r, c] + 1
            for pos in range(2 * m + 1):
                g = pos // 2
                for c in range(j):
                    if pos % 2 == 0 and tab[r, c] >= g:
                        nxt[i, c] = tab[r, c] + 1
                    else:
                        nxt[i, c] = tab[r, c]
                nxt[i, j] = g
                i += 1
        tab = nxt
        rows = total
    return tab


def clause_truth(table, ops, lhs, rhs, ptr):
    cdef const int8_t[:, :] t = np.ascontiguousarray(table, dtype=np.int8)
    cdef const int8_t[:] o = np.ascontiguousarray(ops, dtype=np.int8)
    cdef const int32_t[:] a = np.ascontiguousarray(lhs, dtype=np.int32)
    cdef const int32_t[:] b = np.ascontiguousarray(rhs, dtype=np.int32)
    cdef const int32_t[:] p = np.ascontiguousarray(ptr, dtype=np.int32)
    cdef Py_ssize_t rows = t.shape[0], m = p.shape[0] - 1, r, c, q
    out = np.zeros((rows, m), dtype=np.uint8)
    cdef uint8_t[:, :] res = out
    cdef int x, y, op, v
    with nogil:
        for r in range(rows):
            for c in range(m):
                v = 0
                for q in range(p[c], p[c + 1]):
                    x = t[r, a[q]]
                    y = t[r, b[q]]
                    op = o[q]
                    if op == 0:
                        v = x < y
                    elif op == 1:
                        v = x <= y
                    elif op == 2:
                        v = x == y
                    else:
                        v = x != y
                    if v:
                        break
                res[r, c] = v
    return out


cdef inline int _popcount(uint64_t x) nogil:
    cdef int n = 0
    while x:
        x &= x - 1
        n += 1
    return n


cdef inline int _lowbit(uint64_t x) nogil:
    cdef int i = 0
    while not (x & 1):
        x >>= 1
        i += 1
    return i


cdef int _find(int* parent, int v) nogil:
    while parent[v] != v:
        parent[v] = parent[parent[v]]
        v = parent[v]
    return v


cdef int _llh(int nv, int nc, const int32_t* nptr, const int32_t* na, const int32_t* nb,
              const int32_t* head, const uint64_t* zm, const uint8_t* tail,
              int* out, int* ph, uint64_t* pz, uint8_t* pt, uint8_t* alive) nogil:
    # same algorithm as _kernels_py.ll_horn_solve; scratch arrays sized nc
    cdef int parent[MAXV]
    cdef int cls[MAXV]
    cdef int level_of[MAXV]
    cdef int v, c, t, h, npsi, lvl, merged, active, x, bestsz, sz, changed, r0, w
    cdef uint64_t z, remaining, forb, best, m, rest, zz
    for v in range(nv):
        parent[v] = v
    while True:
        for v in range(nv):
            cls[v] = _find(parent, v)
        npsi = 0
        for c in range(nc):
            active = 1
            for t in range(nptr[c], nptr[c + 1]):
                if cls[na[t]] != cls[nb[t]]:
                    active = 0
                    break
            if not active:
                continue
            if head[c] < 0:
                return 0
            h = cls[head[c]]
            z = 0
            zz = zm[c]
            while zz:
                w = _lowbit(zz)
                zz &= zz - 1
                if cls[w] != h:
                    z |= (<uint64_t>1) << cls[w]
            if z == 0:
                if tail[c]:
                    continue
                return 0
            ph[npsi] = h
            pz[npsi] = z
            pt[npsi] = tail[c]
            alive[npsi] = 1
            npsi += 1
        remaining = 0
        for v in range(nv):
            remaining |= (<uint64_t>1) << cls[v]
        lvl = 0
        merged = 0
        while remaining:
            forb = 0
            for c in range(npsi):
                if alive[c] and not pt[c]:
                    forb |= (<uint64_t>1) << ph[c]
            best = 0
            bestsz = 65
            rest = remaining
            while rest:
                x = _lowbit(rest)
                rest &= rest - 1
                m = (<uint64_t>1) << x
                changed = 1
                while changed:
                    changed = 0
                    for c in range(npsi):
                        if alive[c] and pt[c] and ((m >> ph[c]) & 1) and (pz[c] & ~m):
                            m |= pz[c]
                            changed = 1
                if m & forb:
                    continue
                sz = _popcount(m)
                if sz < bestsz:
                    best = m
                    bestsz = sz
            if best == 0:
                return 0
            r0 = -1
            rest = best
            while rest:
                x = _lowbit(rest)
                rest &= rest - 1
                level_of[x] = lvl
                if bestsz > 1:
                    if r0 < 0:
                        r0 = _find(parent, x)
                    else:
                        parent[_find(parent, x)] = r0
            if bestsz > 1:
                merged = 1
            for c in range(npsi):
                if alive[c] and (((best >> ph[c]) & 1) or (pz[c] & best)):
                    alive[c] = 0
            remaining &= ~best
            lvl += 1
        if not merged:
            for v in range(nv):
                out[v] = level_of[cls[v]]
            return 1


def ll_horn_solve(int nvars, neq_ptr, neq_a, neq_b, head, zmask, tail):
    if nvars > MAXV:
        raise ValueError("at most %d variables" % MAXV)
    cdef const int32_t[:] p = np.ascontiguousarray(neq_ptr, dtype=np.int32)
    cdef const int32_t[:] a = np.ascontiguousarray(neq_a if len(neq_a) else [0], dtype=np.int32)
    cdef const int32_t[:] b = np.ascontiguousarray(neq_b if len(neq_b) else [0], dtype=np.int32)
    cdef Py_ssize_t nc = len(head)
    cdef const int32_t[:] h = np.ascontiguousarray(head if nc else [0], dtype=np.int32)
    cdef const uint64_t[:] z = np.ascontiguousarray(zmask if nc else [0], dtype=np.uint64)
    cdef const uint8_t[:] tl = np.ascontiguousarray(tail if nc else [0], dtype=np.uint8)
    out = np.zeros(nvars if nvars else 1, dtype=np.int32)
    cdef int32_t[:] o = out
    cdef int res
    cdef int* buf = <int*>malloc(sizeof(int) * (nvars + 1))
    cdef int* ph = <int*>malloc(sizeof(int) * (nc + 1))
    cdef uint64_t* pz = <uint64_t*>malloc(sizeof(uint64_t) * (nc + 1))
    cdef uint8_t* pt = <uint8_t*>malloc(nc + 1)
    cdef uint8_t* al = <uint8_t*>malloc(nc + 1)
    cdef int i
    try:
        res = _llh(nvars, <int>nc, &p[0], &a[0], &b[0], &h[0], &z[0], &tl[0], buf, ph, pz, pt, al)
        if not res:
            return None
        for i in range(nvars):
            o[i] = buf[i]
    finally:
        free(buf); free(ph); free(pz); free(pt); free(al)
    return out[:nvars]


cdef int _is_canonical(const int32_t[:, :] perm, int* s, int k) nogil:
    # s sorted ascending; canonical iff no image sorts lexicographically smaller
    cdef int img[8]
    cdef int P = perm.shape[0], q, i, j, t
    for q in range(P):
        for i in range(k):
            img[i] = perm[q, s[i]]
        for i in range(1, k):
            t = img[i]
            j = i - 1
            while j >= 0 and img[j] > t:
                img[j + 1] = img[j]
                j -= 1
            img[j + 1] = t
        for i in range(k):
            if img[i] < s[i]:
                return 0
            if img[i] > s[i]:
                break
    return 1


def canonical_subsets(perm, int max_size):
    """Subsets of size <= max_size (up to 3), one per orbit of the group.

    ``perm[q, f]`` is the image of item ``f`` under group element ``q``.
    The representative is the lexicographically least sorted tuple.
    """
    if max_size > 3:
        raise ValueError("max_size <= 3")
    cdef const int32_t[:, :] pm = np.ascontiguousarray(perm, dtype=np.int32)
    cdef int F = pm.shape[1]
    cdef int s[3]
    cdef int a, b, c, npass
    cdef Py_ssize_t n = 0, total = 0
    canon1 = np.zeros(F, dtype=np.uint8)
    cdef uint8_t[:] c1 = canon1
    pairs = []
    out = None
    cdef int16_t[:, :] o
    for npass in range(2):
        n = 0
        if npass == 1:
            out = np.full((total, 3), -1, dtype=np.int16)
            o = out
        # empty set
        if npass == 1:
            pass
        n += 1
        if max_size >= 1:
            for a in range(F):
                s[0] = a
                if npass == 0:
                    c1[a] = _is_canonical(pm, s, 1)
                if c1[a]:
                    if npass == 1:
                        o[n, 0] = a
                    n += 1
        if max_size >= 2:
            if npass == 0:
                for a in range(F):
                    if not c1[a]:
                        continue
                    for b in range(a + 1, F):
                        s[0] = a
                        s[1] = b
                        if _is_canonical(pm, s, 2):
                            pairs.append((a, b))
            for a, b in pairs:
                if npass == 1:
                    o[n, 0] = a
                    o[n, 1] = b
                n += 1
        if max_size >= 3:
            for a, b in pairs:
                for c in range(b + 1, F):
                    s[0] = a
                    s[1] = b
                    s[2] = c
                    if _is_canonical(pm, s, 3):
                        if npass == 1:
                            o[n, 0] = a
                            o[n, 1] = b
                            o[n, 2] = c
                        n += 1
        total = n
    return out


def ll_horn_grid_scan(subsets, neq_ptr, neq_a, neq_b, head, zmask, tail,
                      truth, pair_vars, pair_truth, code_row, int nvars):
    """Check solver, equality sets and injective witnesses on every subset.

    ``truth[f]`` / ``pair_truth[p]`` are bit sets (two words) over the rows
    of the weak-order table; ``code_row`` maps a base-``nvars`` rank code to
    its row.  Returns counters and the indices of failing subsets.
    """
    cdef const int16_t[:, :] S = subsets
    cdef const int32_t[:] fp = np.ascontiguousarray(neq_ptr, dtype=np.int32)
    cdef const int32_t[:] fa = np.ascontiguousarray(neq_a, dtype=np.int32)
    cdef const int32_t[:] fb = np.ascontiguousarray(neq_b, dtype=np.int32)
    cdef const int32_t[:] fh = np.ascontiguousarray(head, dtype=np.int32)
    cdef const uint64_t[:] fz = np.ascontiguousarray(zmask, dtype=np.uint64)
    cdef const uint8_t[:] ft = np.ascontiguousarray(tail, dtype=np.uint8)
    cdef const uint64_t[:, :] tr = np.ascontiguousarray(truth, dtype=np.uint64)
    cdef const int32_t[:, :] pv = np.ascontiguousarray(pair_vars, dtype=np.int32)
    cdef const uint64_t[:, :] ptr_ = np.ascontiguousarray(pair_truth, dtype=np.uint64)
    cdef const int32_t[:] cr = np.ascontiguousarray(code_row, dtype=np.int32)
    cdef Py_ssize_t N = S.shape[0], i
    cdef int k = S.shape[1], npairs = pv.shape[0]
    cdef int32_t cp[40]
    cdef int32_t ca[80]
    cdef int32_t cb[80]
    cdef int32_t ch[40]
    cdef uint64_t cz[40]
    cdef uint8_t ct[40]
    cdef int lev[MAXV]
    cdef int ph[40]
    cdef uint64_t pz[40]
    cdef uint8_t pt[40]
    cdef uint8_t al[40]
    cdef uint8_t in_e[64]
    cdef int nc, base_nc, base_nl, nl, j, f, t, q, oracle_sat, solver_sat, row, code, mult
    cdef int ok
    cdef uint64_t m0, m1
    cdef long n_sat = 0, n_dis = 0, n_eq = 0, n_wit = 0, n_pairs_checked = 0
    failures = []
    for i in range(N):
        nc = 0
        nl = 0
        cp[0] = 0
        m0 = ~(<uint64_t>0)
        m1 = ~(<uint64_t>0)
        for j in range(k):
            f = S[i, j]
            if f < 0:
                continue
            for t in range(fp[f], fp[f + 1]):
                ca[nl] = fa[t]
                cb[nl] = fb[t]
                nl += 1
            ch[nc] = fh[f]
            cz[nc] = fz[f]
            ct[nc] = ft[f]
            nc += 1
            cp[nc] = nl
            m0 &= tr[f, 0]
            m1 &= tr[f, 1]
        oracle_sat = (m0 | m1) != 0
        solver_sat = _llh(nvars, nc, cp, ca, cb, ch, cz, ct, lev, ph, pz, pt, al)
        ok = 1
        if oracle_sat != solver_sat:
            n_dis += 1
            ok = 0
        if solver_sat and oracle_sat:
            n_sat += 1
            code = 0
            mult = 1
            for j in range(nvars):
                code += lev[j] * mult
                mult *= nvars
            row = cr[code]
            if row < 0 or not ((m0 if row < 64 else m1) >> (row % 64)) & 1:
                n_wit += 1
                ok = 0
            base_nc = nc
            base_nl = nl
            # equality set by re-solving with one extra disequality
            for q in range(npairs):
                ca[base_nl] = pv[q, 0]
                cb[base_nl] = pv[q, 1]
                ch[base_nc] = -1
                cz[base_nc] = 0
                ct[base_nc] = 0
                cp[base_nc + 1] = base_nl + 1
                in_e[q] = not _llh(nvars, base_nc + 1, cp, ca, cb, ch, cz, ct, lev,
                                   ph, pz, pt, al)
                n_pairs_checked += 1
                if in_e[q] != (((m0 & ptr_[q, 0]) | (m1 & ptr_[q, 1])) == 0):
                    n_eq += 1
                    ok = 0
            # injective witness off E
            nc = base_nc
            nl = base_nl
            for q in range(npairs):
                if in_e[q]:
                    continue
                ca[nl] = pv[q, 0]
                cb[nl] = pv[q, 1]
                nl += 1
                ch[nc] = -1
                cz[nc] = 0
                ct[nc] = 0
                nc += 1
                cp[nc] = nl
            if not _llh(nvars, nc, cp, ca, cb, ch, cz, ct, lev, ph, pz, pt, al):
                n_wit += 1
                ok = 0
            else:
                code = 0
                mult = 1
                for j in range(nvars):
                    code += lev[j] * mult
                    mult *= nvars
                row = cr[code]
                if row < 0 or not ((m0 if row < 64 else m1) >> (row % 64)) & 1:
                    n_wit += 1
                    ok = 0
                for q in range(npairs):
                    if not in_e[q] and lev[pv[q, 0]] == lev[pv[q, 1]]:
                        n_wit += 1
                        ok = 0
        if not ok and len(failures) < 20:
            failures.append(i)
    return {"instances": N, "sat": n_sat, "disagreements": n_dis,
            "equality_mismatches": n_eq, "witness_failures": n_wit,
            "pair_checks": n_pairs_checked, "failures": failures}
