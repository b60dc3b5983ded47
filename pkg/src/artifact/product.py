"""Relation catalog and the product solver.

Catalog time fixes, for the whole relation set, which dimensions are
handled as ll-closed (the set ``S``) and which dimensions are reversed,
then precomputes per relation everything the solver needs:

* ll-Horn clauses for the projection onto ``S`` (over expanded variables),
* for each way the equality set can meet the relation's ``S``-disequalities,
  min-form clauses for each dimension outside ``S``.

Solving an instance is then polynomial: one ll-Horn problem, its equality
set, and one min-form problem per remaining dimension.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import classify, oracle, synth
from .classify import OpFamily, Family
from .core import Cnf, Instance, Literal, Op, Regime, Relation, Solution, Var, dual_relation
from .normalize import (EqualitySet, NormalizationCapExceeded, ShapeReport, cm, decompose,
                        hat, normalize, shape_report, to_cnf, ve_name)
from .oracle import DEFAULT_BUDGET, BudgetExceeded, OracleBudget
from .sexpr import Node, ParseError, cnf_to_sexpr, parse_formula, read_all
from .temporal import (LlHornClause, MinFormClause, equality_set, ll_horn_of_atoms,
                       min_form_of, solve_ll_horn, solve_min_form)

log = logging.getLogger(__name__)

Sig = FrozenSet[Tuple[Var, Var, int]]

FAMILIES = [OpFamily(Family.LL), OpFamily(Family.LL, True), OpFamily(Family.PP),
            OpFamily(Family.PP, True), OpFamily(Family.MIN), OpFamily(Family.MIN, True)]
OPTIONS = ("LL", "LL*", "PM", "PM*")


class NotTractable(ValueError):
    pass


@dataclass
class CatalogEntry:
    relation: Relation
    S: FrozenSet[int] = frozenset()
    dualized: FrozenSet[int] = frozenset()
    dim_closures: Optional[classify.ClosureFacts] = None
    normal_form: Optional[Cnf] = None
    split: Optional[Tuple[Cnf, Dict[int, Cnf], Cnf]] = None
    s_neqs: Tuple[Tuple[Var, Var, int], ...] = ()
    ll_clauses: List[LlHornClause] = field(default_factory=list)       # over ve names of params
    ll_single: Dict[int, List[LlHornClause]] = field(default_factory=dict)
    cr_cache: Dict[Tuple[Sig, int], Optional[Cnf]] = field(default_factory=dict)
    tractable: bool = False
    catalogable: bool = True
    rationale: str = ""
    shape: Optional[ShapeReport] = None

    @property
    def name(self) -> str:
        return self.relation.name

    @property
    def separable(self) -> bool:
        return self.normal_form is not None and all(len(c.dims()) <= 1 for c in self.normal_form.clauses)

    def signature(self, args: Sequence[Var], E: EqualitySet) -> Sig:
        m = dict(zip(self.relation.params, args))
        return frozenset(t for t in self.s_neqs if (m[t[0]], m[t[1]], t[2]) in E)

    def min_form(self, sig: Sig, p: int) -> Optional[List[MinFormClause]]:
        """Cached min-form clauses over params; None stands for false."""
        phi = self.cr_cache[(sig, p)]
        if phi is None:
            return None
        return [min_form_of(c) for c in phi.clauses]


class Catalog(dict):
    """Entries by relation name, with the global choices they were built for."""

    def __init__(self, dims: int, S: Iterable[int] = (), dualized: Iterable[int] = ()):
        super().__init__()
        self.dims = dims
        self.S = frozenset(S)
        self.dualized = frozenset(dualized)

    def tractable(self, names: Iterable[str]) -> bool:
        return all(n in self and self[n].tractable for n in names)


# -- building -------------------------------------------------------------------------

def _ll_of_atoms_ve(atoms) -> LlHornClause:
    """ll-Horn clause over ``x^i`` names from synthesized atoms."""
    ren = []
    for a in atoms:
        if isinstance(a, synth.Tail):
            ren.append(synth.Tail(1, ve_name(a.head, a.dim), tuple(ve_name(z, a.dim) for z in a.members)))
        else:
            ren.append(Literal.make(a.op, 1, ve_name(a.lhs, a.dim), ve_name(a.rhs, a.dim)))
    return ll_horn_of_atoms(ren)


def _mentioned(phi: Cnf, params, dims) -> List[Var]:
    used = {v for l in phi.literals() if l.dim in dims for v in (l.lhs, l.rhs)}
    return [v for v in params if v in used]


def _ll_part(phi: Cnf, params, dims: Sequence[int], budget) -> Optional[List[LlHornClause]]:
    if not dims:
        return []
    vs = _mentioned(phi, params, dims)
    if not vs:
        return [] if oracle.oracle_sat(phi, budget) is not None else [LlHornClause()]
    space = synth.Space.of(phi, vs, dims, budget)
    res = synth.synthesize(space, [synth.ll_template(p, dims) for p in dims])
    if not res.ok:
        return None
    return [_ll_of_atoms_ve(atoms) for atoms in res.clauses]


def _min_part(phi: Cnf, params, p: int, budget) -> Tuple[bool, Optional[Cnf]]:
    """(ok, hatted min-form Cnf or None for false) for the projection onto ``p``.

    ok also requires the projection to be closed under binary minimum,
    which the min-form solver needs to be complete.
    """
    vs = _mentioned(phi, params, [p])
    if not vs:
        sat = oracle.oracle_sat(phi, budget) is not None
        return True, (Cnf.top(1, ()) if sat else None)
    space = synth.Space.of(phi, vs, [p], budget)
    if not space.allowed.any():
        return True, None
    res = synth.synthesize(space, [synth.min_template(p)])
    if not res.ok:
        return False, None
    out = hat(res.cnf(phi.dims, vs), p)
    if classify.check_ops(Relation.define("cr", vs, out), ("min",), budget) is not None:
        return False, None
    return True, out


def closure_facts(r: Relation, budget: OracleBudget = DEFAULT_BUDGET) -> classify.ClosureFacts:
    """Per-dimension facts for the families the catalog uses; a family
    whose test exceeds the budget is left out of the record."""
    facts = classify.ClosureFacts()
    for d in range(1, r.dims + 1):
        facts.per_dim[d] = {}
        for f in FAMILIES:
            try:
                facts.per_dim[d][f.name] = classify.check_preservation(r, d, f, budget)
            except BudgetExceeded:
                pass
    return facts


def options_of(facts: classify.ClosureFacts, d: int) -> List[str]:
    """Closure options for dimension ``d``; an untested MIN is optimistic
    because every cached projection is checked for MIN on its own."""
    known = facts.per_dim.get(d, {})
    ok = lambda name: name in known and known[name].holds
    maybe = lambda name: name not in known or known[name].holds
    out = []
    if ok("LL"):
        out.append("LL")
    if ok("LL*"):
        out.append("LL*")
    if ok("PP") and maybe("MIN"):
        out.append("PM")
    if ok("PP*") and maybe("MIN*"):
        out.append("PM*")
    return out


def _choose(per_rel: List[Dict[int, List[str]]], dims: int) -> Dict[int, str]:
    choice = {}
    for d in range(1, dims + 1):
        support = {o: sum(o in m[d] for m in per_rel) for o in OPTIONS}
        choice[d] = max(OPTIONS, key=lambda o: (support[o], -OPTIONS.index(o)))
    return choice


def _entry(r: Relation, facts: Optional[classify.ClosureFacts], choice: Dict[int, str],
           budget: OracleBudget) -> CatalogEntry:
    n = r.dims
    S = frozenset(d for d in range(1, n + 1) if choice[d].startswith("LL"))
    D = frozenset(d for d in range(1, n + 1) if choice[d].endswith("*"))
    e = CatalogEntry(r, S, D, facts)
    if facts is not None:
        missing = [d for d in range(1, n + 1) if choice[d] not in options_of(facts, d)]
        if missing:
            e.rationale = "dimension %s lacks the %s closure chosen for the catalog" % (
                missing[0], choice[missing[0]])
    rd = r
    for d in sorted(D):
        rd = dual_relation(rd, d)
    defn = rd.definition
    if defn.regime == Regime.RAW:
        defn = to_cnf(defn)
    nf = normalize(defn, budget)
    e.normal_form = nf
    phis, per, rest = decompose(nf, S)
    e.split = (phis, per, rest)
    if rest.clauses and not e.rationale:
        e.rationale = "clause %s fits no weakly determined shape" % rest.clauses[0]
    params = r.params
    ll = _ll_part(nf, params, sorted(S), budget)
    if ll is None and not e.rationale:
        e.rationale = "projection onto S=%s has no ll-Horn definition" % sorted(S)
    e.ll_clauses = ll or []
    if e.separable:
        for i in sorted(S):
            e.ll_single[i] = _ll_part(nf, params, [i], budget) or []
    if not rest.clauses:
        neqs = sorted({(l.lhs, l.rhs, l.dim) for p, f in per.items() for c in f.clauses
                       for l in c.literals if l.op == Op.NEQ and l.dim in S})
        e.s_neqs = tuple(neqs)
        for k in range(len(neqs) + 1):
            for sub in itertools.combinations(neqs, k):
                sig = frozenset(sub)
                mod = cm(nf, S, EqualitySet.of(sig))
                for p in range(1, n + 1):
                    if p in S:
                        continue
                    ok, phi = _min_part(mod, params, p, budget)
                    if not ok:
                        if not e.rationale:
                            e.rationale = "dimension %d has no min-closed min-form projection" % p
                        continue
                    e.cr_cache[(sig, p)] = phi
    if facts is not None:
        e.shape = shape_report(rd.with_definition(nf), _dual_names(facts, D), budget)
    e.tractable = not e.rationale
    if e.tractable:
        e.rationale = "S=%s dualized=%s" % (sorted(S), sorted(D))
    return e


def _dual_names(facts: classify.ClosureFacts, D) -> Dict[int, set]:
    """Closure names as seen after reversing the dimensions in ``D``."""
    out = {}
    for d, names in facts.as_sets().items():
        if d in D:
            names = {n[:-1] if n.endswith("*") else n + "*" for n in names}
        out[d] = names
    return out


def build_catalog(relations: Iterable[Relation], budget: OracleBudget = DEFAULT_BUDGET) -> Catalog:
    relations = list(relations)
    dims = {r.dims for r in relations}
    if len(dims) > 1:
        raise ValueError("relations disagree on the number of dimensions")
    n = dims.pop() if dims else 1
    facts: Dict[str, Optional[classify.ClosureFacts]] = {}
    opts = []
    for r in relations:
        try:
            f = closure_facts(r, budget)
        except BudgetExceeded:
            facts[r.name] = None
            continue
        facts[r.name] = f
        opts.append({d: options_of(f, d) for d in range(1, n + 1)})
    choice = _choose(opts, n) if opts else {d: "LL" for d in range(1, n + 1)}
    cat = Catalog(n, (d for d in choice if choice[d].startswith("LL")),
                  (d for d in choice if choice[d].endswith("*")))
    for r in relations:
        if facts[r.name] is None:
            cat[r.name] = CatalogEntry(r, cat.S, cat.dualized, catalogable=False,
                                       rationale="outside the oracle budget")
            continue
        try:
            cat[r.name] = _entry(r, facts[r.name], choice, budget)
        except (BudgetExceeded, NormalizationCapExceeded) as ex:
            cat[r.name] = CatalogEntry(r, cat.S, cat.dualized, catalogable=False, rationale=str(ex))
    return cat


# -- solving ---------------------------------------------------------------------------

class Method(enum.Enum):
    FACTORS = "factors"
    ORACLE = "oracle"


@dataclass
class Verdict:
    sat: bool
    solution: Optional[Solution]
    method: Method
    trace: Dict[str, object] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def answer(self) -> str:
        return "SAT" if self.sat else "UNSAT"


def _reflect(levels: Dict[int, Dict[Var, int]], D, vars: Sequence[Var], n: int) -> Dict[Var, Tuple[int, ...]]:
    return {v: tuple(-levels[d][v] if d in D else levels[d][v] for d in range(1, n + 1)) for v in vars}


def _check(instance: Instance, emb) -> None:
    for name, args in instance.constraints:
        if not instance.relations[name].instantiate(args).evaluate(emb):
            raise classify.InconsistencyError("witness violates constraint %s%s" % (name, args))


def _unsat(method: Method, trace) -> Verdict:
    return Verdict(False, None, method, trace)


def solve_by_factors(instance: Instance, catalog: Catalog) -> Verdict:
    n = catalog.dims
    if instance.constraints and instance.dims != n:
        raise ValueError("instance has %d dimensions, catalog %d" % (instance.dims, n))
    for name, _ in instance.constraints:
        if name not in catalog or not catalog[name].tractable:
            raise NotTractable("relation %s is not catalog-tractable" % name)
    S, D = sorted(catalog.S), catalog.dualized
    vs = list(instance.vars)
    trace: Dict[str, object] = {"S": S, "dualized": sorted(D)}

    # ll-Horn part over expanded variables
    psi = []
    for name, args in instance.constraints:
        m = {ve_name(p, i): ve_name(a, i) for p, a in zip(catalog[name].relation.params, args) for i in S}
        psi.extend(c.rename(m) for c in catalog[name].ll_clauses)
    ve_vars = [ve_name(v, i) for v in vs for i in S]
    levels: Dict[int, Dict[Var, int]] = {}
    if S:
        if solve_ll_horn(psi, ve_vars) is None:
            trace["psi_S"] = "unsat"
            return _unsat(Method.FACTORS, trace)
        E_ve, wit = equality_set(psi, ve_vars)
        back = {ve_name(v, i): (v, i) for v in vs for i in S}
        E = EqualitySet.of((back[x][0], back[y][0], back[x][1]) for x, y, _ in E_ve
                           if back[x][1] == back[y][1])
        rank = wit.rank()
        for i in S:
            levels[i] = {v: rank[ve_name(v, i)] for v in vs}
        trace["psi_S"] = "sat"
        trace["E"] = sorted(E)
    else:
        E = EqualitySet()

    for p in range(1, n + 1):
        if p in catalog.S:
            continue
        clauses: List[MinFormClause] = []
        for name, args in instance.constraints:
            e = catalog[name]
            mf = e.min_form(e.signature(args, E), p)
            m = dict(zip(e.relation.params, args))
            if mf is None:
                trace["psi_%d" % p] = "unsat"
                return _unsat(Method.FACTORS, trace)
            clauses.extend(c.rename(m) for c in mf)
        w = solve_min_form(clauses, vars=vs)
        if w is None:
            trace["psi_%d" % p] = "unsat"
            return _unsat(Method.FACTORS, trace)
        trace["psi_%d" % p] = "sat"
        levels[p] = w.rank()
    emb = _reflect(levels, D, vs, n)
    _check(instance, emb)
    return Verdict(True, Solution.from_embedding(emb, n) if vs else Solution.from_embedding({}, n),
                   Method.FACTORS, trace)


def solve_per_dimension(instance: Instance, catalog: Catalog) -> Verdict:
    """Each dimension on its own; valid when every clause mentions one dimension."""
    n = catalog.dims
    vs = list(instance.vars)
    levels: Dict[int, Dict[Var, int]] = {}
    trace: Dict[str, object] = {"per_dimension": True}
    for d in range(1, n + 1):
        if d in catalog.S:
            cl = []
            for name, args in instance.constraints:
                e = catalog[name]
                m = {ve_name(p, d): ve_name(a, d) for p, a in zip(e.relation.params, args)}
                cl.extend(c.rename(m) for c in e.ll_single[d])
            w = solve_ll_horn(cl, [ve_name(v, d) for v in vs])
            if w is None:
                trace["dim_%d" % d] = "unsat"
                return _unsat(Method.FACTORS, trace)
            r = w.rank()
            levels[d] = {v: r[ve_name(v, d)] for v in vs}
        else:
            cl = []
            for name, args in instance.constraints:
                e = catalog[name]
                mf = e.min_form(frozenset(), d)
                if mf is None:
                    trace["dim_%d" % d] = "unsat"
                    return _unsat(Method.FACTORS, trace)
                m = dict(zip(e.relation.params, args))
                cl.extend(c.rename(m) for c in mf)
            w = solve_min_form(cl, vars=vs)
            if w is None:
                trace["dim_%d" % d] = "unsat"
                return _unsat(Method.FACTORS, trace)
            levels[d] = w.rank()
        trace["dim_%d" % d] = "sat"
    emb = _reflect(levels, catalog.dualized, vs, n)
    _check(instance, emb)
    return Verdict(True, Solution.from_embedding(emb, n), Method.FACTORS, trace)


def solve_generic(instance: Instance, catalog: Optional[Catalog] = None,
                  budget: OracleBudget = DEFAULT_BUDGET) -> Verdict:
    names = sorted({name for name, _ in instance.constraints})
    if catalog is None:
        catalog = build_catalog([instance.relations[n] for n in names], budget)
    if catalog.tractable(names):
        if all(catalog[n].separable for n in names):
            return solve_per_dimension(instance, catalog)
        return solve_by_factors(instance, catalog)
    bad = [n for n in names if n not in catalog or not catalog[n].tractable]
    warn = ["relations outside the tractable catalog: %s" % ", ".join(bad)]
    rels = [instance.relations[n] for n in bad]
    if rels and all(r.arity == 2 for r in rels):
        try:
            v = classify.classify_binary_expansion(rels, 1, budget)
            if not v.tractable:
                warn.append("NP-COMPLETE: %s not Ord-Horn" % ", ".join(v.offenders))
        except BudgetExceeded:
            pass
    phi = instance.formula()
    if phi.regime == Regime.RAW:
        phi = to_cnf(phi)
    if len(instance.vars) > budget.max_vars:
        raise BudgetExceeded("%d variables exceed the oracle budget of %d"
                             % (len(instance.vars), budget.max_vars))
    for w in warn:
        log.warning(w)
    sol = oracle.oracle_sat(phi, budget)
    if sol is not None:
        emb = dict(sol.embedding)
        for v in instance.vars:
            emb.setdefault(v, (0,) * instance.dims)
        _check(instance, emb)
        sol = Solution.from_embedding(emb, instance.dims)
    return Verdict(sol is not None, sol, Method.ORACLE, {"fallback": bad}, warn)


# -- sidecar --------------------------------------------------------------------------------

def _ll_to_sexpr(c: LlHornClause) -> str:
    parts = ["(ne %s %s)" % p for p in c.neq] + ["(lt %s %s)" % (z, c.head) for z in c.strict]
    if c.head is not None and not c.strict:
        parts.append("(head %s)" % c.head)
    if c.tail:
        parts.append("(tail)")
    return "(llh%s)" % "".join(" " + p for p in parts)


def _ll_from_node(node: Node) -> LlHornClause:
    neq, strict, head, tail = [], [], None, False
    for x in node.items[1:]:
        h = x.head
        a = [y.atom for y in x.items[1:]]
        if h == "ne":
            neq.append((a[0], a[1]))
        elif h == "lt":
            strict.append(a[0])
            head = a[1]
        elif h == "head":
            head = a[0]
        elif h == "tail":
            tail = True
        else:
            raise x.err("bad ll-Horn part")
    return LlHornClause(tuple(neq), tuple(strict), head, tail)


def _sig_sexpr(sig: Sig) -> str:
    return "(sig%s)" % "".join(" (%d %s %s)" % (i, x, y) for x, y, i in sorted(sig))


def entry_to_sexpr(e: CatalogEntry) -> str:
    b = lambda v: "#t" if v else "#f"
    words = " ".join(w.strip("();") for w in e.rationale.split() if w.strip("();"))
    lines = ["(catalog-entry %s" % e.name,
             "  (S%s)" % "".join(" %d" % d for d in sorted(e.S)),
             "  (dualized%s)" % "".join(" %d" % d for d in sorted(e.dualized)),
             "  (tractable %s)" % b(e.tractable),
             "  (catalogable %s)" % b(e.catalogable),
             "  (rationale %s)" % words]
    if e.normal_form is not None:
        lines.append("  (normal-form %s)" % cnf_to_sexpr(e.normal_form))
        lines.append("  (s-neqs%s)" % "".join(" (%d %s %s)" % (i, x, y) for x, y, i in e.s_neqs))
        lines.append("  (ll-horn%s)" % "".join(" " + _ll_to_sexpr(c) for c in e.ll_clauses))
        for d in sorted(e.ll_single):
            lines.append("  (ll-single %d%s)" % (d, "".join(" " + _ll_to_sexpr(c) for c in e.ll_single[d])))
        for (sig, p), phi in sorted(e.cr_cache.items(), key=lambda kv: (sorted(kv[0][0]), kv[0][1])):
            lines.append("  (cr %s %d %s)" % (_sig_sexpr(sig), p, "false" if phi is None else cnf_to_sexpr(phi)))
    return "\n".join(lines) + ")"


def catalog_to_text(cat: Catalog) -> str:
    head = "(catalog (dims %d) (S%s) (dualized%s))" % (
        cat.dims, "".join(" %d" % d for d in sorted(cat.S)),
        "".join(" %d" % d for d in sorted(cat.dualized)))
    return "\n".join([head] + [entry_to_sexpr(cat[k]) for k in sorted(cat)]) + "\n"


def _ints(node: Node) -> List[int]:
    return [int(x.atom) for x in node.items[1:]]


def catalog_from_text(text: str, relations: Mapping[str, Relation]) -> Catalog:
    nodes = read_all(text)
    if not nodes or nodes[0].head != "catalog":
        raise ParseError("catalog sidecar must start with (catalog ...)")
    meta = {x.head: x for x in nodes[0].items[1:]}
    cat = Catalog(_ints(meta["dims"])[0], _ints(meta["S"]), _ints(meta["dualized"]))
    for node in nodes[1:]:
        if node.head != "catalog-entry":
            raise node.err("expected catalog-entry")
        name = node.items[1].atom
        if name not in relations:
            raise node.err("catalog entry for unknown relation %s" % name)
        r = relations[name]
        f = {x.head: x for x in node.items[2:] if x.head not in ("ll-single", "cr")}
        e = CatalogEntry(r, frozenset(_ints(f["S"])), frozenset(_ints(f["dualized"])))
        e.tractable = f["tractable"].items[1].atom == "#t"
        e.catalogable = f["catalogable"].items[1].atom == "#t"
        e.rationale = " ".join(x.atom for x in f["rationale"].items[1:])
        if "normal-form" in f:
            e.normal_form = parse_formula(f["normal-form"].items[1], r.dims, r.params)
            e.split = decompose(e.normal_form, e.S)
            e.s_neqs = tuple((t.items[1].atom, t.items[2].atom, int(t.items[0].atom))
                             for t in f["s-neqs"].items[1:])
            e.ll_clauses = [_ll_from_node(x) for x in f["ll-horn"].items[1:]]
        for x in node.items[2:]:
            if x.head == "ll-single":
                e.ll_single[int(x.items[1].atom)] = [_ll_from_node(y) for y in x.items[2:]]
            elif x.head == "cr":
                sig = frozenset((t.items[1].atom, t.items[2].atom, int(t.items[0].atom))
                                for t in x.items[1].items[1:])
                body = x.items[3]
                phi = None if body.atom == "false" else parse_formula(body, 1, r.params)
                e.cr_cache[(sig, int(x.items[2].atom))] = phi
        cat[name] = e
    return cat
