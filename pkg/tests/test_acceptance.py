"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Sizes and tolerances are pinned here; every comparison is exact.
"""

import itertools
import random

import pytest

from artifact import calculi, classify, gen, oracle, product
from artifact.core import Clause, Cnf, Instance, Literal, Op, Regime
from artifact.normalize import normalize_with_stats, to_cnf
from artifact.sexpr import parse_document, parse_formula
from artifact.temporal import equality_set, solve_ll_horn
from conftest import DATA, F
from test_temporal import ll_to_cnf

pytestmark = pytest.mark.acceptance

RANDOM_FORMULAS = 1000
PRONE_FORMULAS = 500
RANDOM_LL = 10_000
FACTOR_INSTANCES = 1000
CORPUS = ["mixed.qrel", "worked.qrel", "cdc_basics.qrel", "allen_basics.qrel"]


@pytest.fixture
def verdict(capsys):
    def say(n, ok, detail):
        with capsys.disabled():
            print("\ncriterion %d: %s  %s" % (n, "PASS" if ok else "FAIL", detail))
        assert ok, detail
    return say


def corpus_relations():
    for name in CORPUS:
        yield from parse_document((DATA / name).read_text()).relations.values()


# 1 -------------------------------------------------------------------------------------

def test_1_normalization_soundness(verdict):
    phis = [r.definition for r in corpus_relations()]
    # uniform formulas, plus a batch planting the pattern R5/R6 act on
    for text in (gen.corpus_text(2024, RANDOM_FORMULAS, 4, 3, 2),
                 gen.corpus_text(2025, PRONE_FORMULAS, 4, 3, 2, prone=1.0)):
        for _, node in parse_document(text).formulas:
            phi = parse_formula(node, 2)
            assert phi.regime == Regime.BASE and len(phi.vars) <= 4 and len(phi.clauses) <= 3
            phis.append(phi)
    bad, over, steps, rewritten = [], [], 0, 0
    for phi in phis:
        if phi.regime == Regime.RAW:
            phi = to_cnf(phi)
        out, st = normalize_with_stats(phi)
        steps += st.r5_steps + st.r6_steps
        rewritten += st.r5_steps + st.r6_steps > 0
        if st.r5_steps > st.r5_cap or st.r6_steps > st.r6_cap:
            over.append(phi)
        if not oracle.oracle_equiv_pp(out, (), phi, phi.vars):
            bad.append(phi)
    verdict(1, not bad and not over and len(phis) >= RANDOM_FORMULAS + PRONE_FORMULAS,
            "%d formulas, %d rewritten by R5/R6 (%d steps), %d inequivalent, %d over cap"
            % (len(phis), rewritten, steps, len(bad), len(over)))


# 2 -------------------------------------------------------------------------------------

from test_normalize import WORKED_NORMAL  # noqa: E402


def test_2_worked_example(verdict):
    r = parse_document((DATA / "worked.qrel").read_text()).relations["worked"]
    out, st = normalize_with_stats(to_cnf(r.definition))
    want = F(WORKED_NORMAL, 2, r.params)
    ok = set(out.clauses) == set(want.clauses) and len(out.clauses) == 5
    verdict(2, ok, "five clauses, R5 steps %d, R6 steps %d" % (st.r5_steps, st.r6_steps))


# 3 -------------------------------------------------------------------------------------

def test_3_ll_horn_solver(verdict):
    grid = gen.ll_horn_grid()
    scan = gen.scan_ll_horn_grid(grid)
    orbits = gen.burnside_count(grid.perm, 3)
    rng = random.Random(3)
    dis = sat = eq_bad = 0
    for _ in range(RANDOM_LL):
        vs = gen.var_names(rng.randint(2, 6))
        cl = gen.random_ll_horn(rng, vs, rng.randint(1, 14), max_neq=rng.randint(0, 2))
        w = solve_ll_horn(cl, vs)
        o = oracle.oracle_sat(ll_to_cnf(cl, vs))
        dis += (w is None) != (o is None)
        if w is not None:
            sat += 1
            level = w.rank()
            dis += not all(c.holds(level) for c in cl)
            E, wit = equality_set(cl, vs)
            lv = wit.rank()
            eq = {(x, y) for x, y, _ in E}
            eq_bad += any((lv[x] == lv[y]) != ((x, y) in eq or (y, x) in eq)
                          for x, y in itertools.combinations(vs, 2))
    ok = (len(grid.subsets) == orbits and scan["disagreements"] == 0
          and scan["equality_mismatches"] == 0 and scan["witness_failures"] == 0
          and not scan["failures"] and dis == 0 and eq_bad == 0)
    verdict(3, ok, "grid %d sets (%d SAT), %d pair checks; random %d (%d SAT); "
            "disagreements %d+%d, equality mismatches %d+%d, witness failures %d+%d"
            % (scan["instances"], scan["sat"], scan["pair_checks"], RANDOM_LL, sat,
               scan["disagreements"], dis, scan["equality_mismatches"], 0,
               scan["witness_failures"], eq_bad))


# 4 -------------------------------------------------------------------------------------

def test_4_min_form_solver(verdict):
    grid = gen.min_form_grid()
    scan = gen.scan_min_form_grid(grid)
    ok = (len(grid.subsets) == gen.burnside_count(grid.perm, 3) and scan["min_closed"] > 0
          and scan["disagreements"] == 0 and scan["witness_failures"] == 0)
    verdict(4, ok, "%d sets, %d MIN-closed, %d SAT; disagreements %d, witness failures %d, "
            "disagreements outside MIN-closed %d"
            % (scan["instances"], scan["min_closed"], scan["sat"], scan["disagreements"],
               scan["witness_failures"], scan["open_disagreements"]))


# 5 -------------------------------------------------------------------------------------

def tractable_catalog(rng, n):
    rels = [gen.random_relation(rng, "r%d" % i, rng.randint(2, 3), n, 3) for i in range(4)]
    for _ in range(5):
        rels = [r for r in rels if r.definition.clauses]
        if not rels:
            return None, []
        cat = product.build_catalog(rels)
        keep = [r for r in rels if cat[r.name].tractable]
        if len(keep) == len(rels):
            return cat, rels
        rels = keep
    return None, []


def factor_run(n, seed, per_catalog):
    rng = random.Random(seed)
    stats = {"instances": 0, "sat": 0, "bad": 0, "catalogs": 0, "partial_S": 0}
    catalogs = []
    while stats["instances"] < FACTOR_INSTANCES:
        cat, rels = tractable_catalog(rng, n)
        if not rels:
            continue
        catalogs.append(cat)
        stats["catalogs"] += 1
        stats["partial_S"] += len(cat.S) < n
        for _ in range(per_catalog):
            inst = gen.random_instance(rng, rels, rng.randint(2, 6), rng.randint(1, 8))
            v = product.solve_generic(inst, cat)
            o = oracle.oracle_sat(inst.formula())
            stats["instances"] += 1
            stats["sat"] += v.sat
            if v.method is not product.Method.FACTORS or v.sat != (o is not None):
                stats["bad"] += 1
            elif v.sat and not inst.formula().evaluate(dict(v.solution.embedding)):
                stats["bad"] += 1
    return stats, catalogs


@pytest.fixture(scope="module")
def factor_results():
    return {2: factor_run(2, 52, 50), 3: factor_run(3, 53, 100)}


def test_5_solve_by_factors(verdict, factor_results):
    ok = all(s["bad"] == 0 and s["instances"] >= FACTOR_INSTANCES for s, _ in factor_results.values())
    verdict(5, ok, "; ".join("n=%d: %d instances (%d SAT) over %d catalogs, %d with S smaller "
                             "than all dims, %d disagreements"
                             % (n, s["instances"], s["sat"], s["catalogs"], s["partial_S"], s["bad"])
                             for n, (s, _) in sorted(factor_results.items())))


# 6 -------------------------------------------------------------------------------------

def ord_horn_clauses(params, dims):
    """Every Ord-Horn clause over ``params``: disequalities plus one optional <, <= or = literal."""
    pairs = list(itertools.combinations(params, 2))
    neqs = [Literal.make(Op.NEQ, d, x, y) for d in dims for x, y in pairs]
    tops = [None] + [Literal.make(op, d, x, y) for d in dims
                     for x, y in itertools.permutations(params, 2) for op in (Op.LT, Op.LEQ)]
    tops += [Literal.make(Op.EQ, d, x, y) for d in dims for x, y in pairs]
    for k in range(len(neqs) + 1):
        for sub in itertools.combinations(neqs, k):
            for t in tops:
                lits = list(sub) + ([t] if t is not None else [])
                if lits:
                    yield Clause.of(lits)


def implied_ord_horn(r):
    """Is ``r`` the conjunction of the Ord-Horn clauses it implies?"""
    dims = range(1, r.dims + 1)
    implied = [c for c in ord_horn_clauses(r.params, dims) if oracle.oracle_implies(r.definition, c)]
    return oracle.oracle_equiv_pp(Cnf.make(implied, r.dims, r.params), (), r.definition, r.params)


def test_6_dichotomy_fixtures(verdict):
    allen = classify.classify_binary_expansion(calculi.allen_basics(), 2)
    cdc = classify.classify_binary_expansion(calculi.cdc_basics(2), 1)
    block = classify.classify_binary_expansion(calculi.block_basics(2), 2)
    lt12 = parse_document((DATA / "mixed.qrel").read_text()).relations["lt12"]
    hard = classify.classify_binary_expansion([lt12], 1)
    second = [implied_ord_horn(r) for r in calculi.allen_basics() + calculi.cdc_basics(2)]
    ok = (allen.label == cdc.label == block.label == "P" and len(allen.witnesses) == 13
          and len(cdc.witnesses) == 9 and len(block.witnesses) == 169
          and hard.label == "NP-COMPLETE" and not implied_ord_horn(lt12) and all(second))
    verdict(6, ok, "Allen %s (13), CDC %s (9), Block(2) %s (169); x<1y or x<2y %s, implied "
            "Ord-Horn clauses define it: %s; Allen and CDC basics confirmed by implied clauses: %s"
            % (allen.label, cdc.label, block.label, hard.label, implied_ord_horn(lt12), all(second)))


# 7 -------------------------------------------------------------------------------------

def test_7_interpretation_fixtures(verdict):
    results = {fx.name: fx.check() for fx in calculi.all_fixtures()}
    groups = {g: [k for k in results if k.startswith(g)] for g in ("sf-", "cdc-", "block-m")}
    ok = all(results.values()) and all(groups.values())
    verdict(7, ok, ", ".join("%s %s" % (k, "ok" if v else "FAILED") for k, v in results.items()))


# 8 -------------------------------------------------------------------------------------

def test_8_shape_checks(verdict, factor_results):
    entries = []
    by_dims = {}
    for r in corpus_relations():
        by_dims.setdefault(r.dims, []).append(r)
    for rels in by_dims.values():
        entries += product.build_catalog(rels).values()
    for _, cats in factor_results.values():
        for cat in cats:
            entries += cat.values()
    checked = applicable = 0
    failed = []
    for e in entries:
        if e.shape is None:
            continue
        checked += 1
        applicable += sum(c.applicable for c in e.shape.checks)
        failed += ["%s/%s" % (e.name, c.name) for c in e.shape.checks if c.applicable and not c.passed]
    verdict(8, checked > 0 and applicable > 0 and not failed,
            "%d relations, %d applicable shape checks, failures: %s"
            % (checked, applicable, ", ".join(failed) or "none"))


# 9 -------------------------------------------------------------------------------------

def test_9_sanity_networks(verdict):
    got = {}
    for name in ("allen_m.net", "cdc_cycle.net", "cdc_chain.net"):
        inst = calculi.translate(calculi.network_from_document(parse_document((DATA / name).read_text())))
        v = product.solve_generic(inst)
        got[name] = (v.answer, v.method.value, oracle.oracle_sat(inst.formula()) is not None)
    want = {"allen_m.net": ("UNSAT", "factors", False), "cdc_cycle.net": ("UNSAT", "factors", False),
            "cdc_chain.net": ("SAT", "factors", True)}
    verdict(9, got == want, "; ".join("%s: solver %s (%s), oracle %s"
                                      % (k, a, m, "SAT" if o else "UNSAT") for k, (a, m, o) in got.items()))
