"""Compiled kernels against their pure-Python versions.

Run with ``python benchmarks/bench_kernels.py``.  Each case runs both
backends on the same input, checks that the results agree and prints the
median wall time of a few repetitions.
"""

import argparse
import random
import statistics
import time

import numpy as np

from artifact import _kernels_py as slow
from artifact import gen

try:
    from artifact import _kernels as fast
except ImportError:  # pragma: no cover
    fast = None


def timed(fn, reps):
    out, times = None, []
    for _ in range(reps):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return out, statistics.median(times)


def same(a, b):
    if isinstance(a, dict):
        return all(same(a[k], b[k]) for k in a)
    if a is None or b is None:
        return a is b
    return np.array_equal(np.asarray(a), np.asarray(b))


def case_table():
    return lambda m: m.weak_order_table(7)


def case_truth(seed=0, m=300):
    rng = np.random.default_rng(seed)
    tab = slow.weak_order_table(6)
    lens = rng.integers(1, 4, size=m)
    ptr = np.concatenate([[0], np.cumsum(lens)]).astype(np.int32)
    n = int(ptr[-1])
    ops = rng.integers(0, 4, size=n).astype(np.int8)
    lhs = rng.integers(0, 6, size=n).astype(np.int32)
    rhs = rng.integers(0, 6, size=n).astype(np.int32)
    return lambda mod: mod.clause_truth(tab, ops, lhs, rhs, ptr)


def _encode(clauses, vs):
    idx = {v: i for i, v in enumerate(vs)}
    ptr, a, b, head, zm, tail = [0], [], [], [], [], []
    for c in clauses:
        for x, y in c.neq:
            a.append(idx[x])
            b.append(idx[y])
        ptr.append(len(a))
        head.append(-1 if c.head is None else idx[c.head])
        zm.append(sum(1 << idx[z] for z in c.strict))
        tail.append(int(c.tail))
    return (len(vs), np.array(ptr, np.int32), np.array(a, np.int32), np.array(b, np.int32),
            np.array(head, np.int32), np.array(zm, np.uint64), np.array(tail, np.uint8))


def case_ll_solve(seed=0, count=2000):
    rng = random.Random(seed)
    vs = gen.var_names(6)
    inst = [_encode(gen.random_ll_horn(rng, vs, 8), vs) for _ in range(count)]
    return lambda mod: [mod.ll_horn_solve(*x) for x in inst]


def case_subsets():
    perm = gen.renaming_action(gen.min_form_space())
    return lambda mod: mod.canonical_subsets(perm, 3)


def case_grid_scan(limit=20000):
    grid = gen.ll_horn_grid(max_size=2)
    grid.subsets = grid.subsets[:limit]
    import artifact.gen as g

    def run(mod):
        saved = g.kernels.ll_horn_grid_scan
        g.kernels.ll_horn_grid_scan = mod.ll_horn_grid_scan
        try:
            return g.scan_ll_horn_grid(grid)
        finally:
            g.kernels.ll_horn_grid_scan = saved
    return run


CASES = {
    "weak_order_table(7)": case_table,
    "clause_truth 300 clauses x 4683 rows": case_truth,
    "ll_horn_solve 2000 instances": case_ll_solve,
    "canonical_subsets min-form grid": case_subsets,
    "ll_horn_grid_scan 20000 sets": case_grid_scan,
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=3)
    args = ap.parse_args()
    if fast is None:
        print("compiled extension not built; only the pure-Python timings are shown")
    print("%-40s %12s %12s %8s %s" % ("case", "python [s]", "compiled [s]", "speedup", "agree"))
    for name, make in CASES.items():
        fn = make()
        r_slow, t_slow = timed(lambda: fn(slow), args.reps)
        if fast is None:
            print("%-40s %12.4f %12s %8s %s" % (name, t_slow, "-", "-", "-"))
            continue
        r_fast, t_fast = timed(lambda: fn(fast), args.reps)
        ok = all(same(x, y) for x, y in zip(r_slow, r_fast)) if isinstance(r_slow, list) \
            else same(r_slow, r_fast)
        print("%-40s %12.4f %12.4f %8.1f %s" % (name, t_slow, t_fast, t_slow / max(t_fast, 1e-9), ok))


if __name__ == "__main__":
    main()
