"""Command-line entry point.

Verdicts are written to the report stream; the exit status only says
whether the command ran (0), hit bad input (2) or ran out of budget (3).
Reports are deterministic unless ``--timings`` is given.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import re
import sys
import time
from typing import Dict, List, Optional, Sequence, TextIO

from . import calculi, classify, gen, oracle, product
from .core import Cnf, Instance, Regime, Relation, Solution
from .normalize import NormalizationCapExceeded, normalize_with_stats, to_cnf
from .oracle import HARD_MAX_DIMS, HARD_MAX_VARS, BudgetExceeded, OracleBudget
from .sexpr import (Document, ParseError, cnf_to_sexpr, document_instance, instance_to_text,
                    parse_document, parse_formula, relation_to_sexpr)

log = logging.getLogger("artifact")

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 2, 3

_ATOM = re.compile(r"^[^\s()\"]+$")


# -- report writer ------------------------------------------------------------------------

def _sx(v) -> str:
    if isinstance(v, bool):
        return "#t" if v else "#f"
    if v is None:
        return "nil"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return v if _ATOM.match(v) else json.dumps(v)
    if isinstance(v, dict):
        return "(" + " ".join("(%s %s)" % (k, _sx(x)) for k, x in v.items()) + ")"
    return "(" + " ".join(_sx(x) for x in v) + ")"


class Report:
    """Single writer for one command's records."""

    def __init__(self, out: TextIO, fmt: str = "sexpr", timings: bool = False):
        self.out, self.fmt, self.timings = out, fmt, timings

    def emit(self, _record: str, **fields) -> None:
        fields = {k: v for k, v in fields.items() if v is not None}
        if not self.timings:
            fields.pop("seconds", None)
        if self.fmt == "jsonl":
            self.out.write(json.dumps({"record": _record, **fields}) + "\n")
        else:
            body = "".join(" (%s %s)" % (k, _sx(v)) for k, v in fields.items())
            self.out.write("(%s%s)\n" % (_record, body))


def _witness(sol: Optional[Solution]) -> Optional[Dict[str, List[int]]]:
    if sol is None:
        return None
    return {v: list(t) for v, t in sorted(sol.embedding.items())}


# -- input -------------------------------------------------------------------------------

def _read(path: str) -> Document:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as e:
        raise ValueError("cannot read %s: %s" % (path, e.strerror)) from None
    return parse_document(text)


def _instance(doc: Document) -> Instance:
    if doc.calculus is not None:
        return calculi.translate(calculi.network_from_document(doc))
    return document_instance(doc)


def _relations(doc: Document) -> List[Relation]:
    if doc.relations:
        return list(doc.relations.values())
    if doc.calculus is not None:
        kind, n = doc.calculus
        return calculi.basic_relations(calculi.Calculus(kind), n)
    return []


def _group_of(doc: Document, rels: Sequence[Relation]) -> int:
    """Points per element: from the calculus, else from interval-style relation names."""
    if doc.calculus is not None and not doc.relations:
        return calculi.element_points(calculi.Calculus(doc.calculus[0]))
    if rels and all(r.name.startswith(("allen.", "block.")) for r in rels):
        return 2
    return 1


def _budget(args) -> OracleBudget:
    return OracleBudget(max_vars=args.max_oracle_vars, max_dims=args.max_dims)


# -- commands ----------------------------------------------------------------------------

def cmd_solve(args, rep: Report) -> None:
    budget = _budget(args)
    for path in args.inputs:
        doc = _read(path)
        inst = _instance(doc)
        cat = None
        if args.catalog:
            cat = product.catalog_from_text(open(args.catalog, encoding="utf-8").read(),
                                            inst.relations)
        t = time.perf_counter()
        v = product.solve_generic(inst, cat, budget)
        rep.emit("solve", input=path, verdict=v.answer, method=v.method.value.upper(),
                 witness=_witness(v.solution), warnings=v.warnings or None,
                 seconds=round(time.perf_counter() - t, 4))


def cmd_classify(args, rep: Report) -> None:
    budget = _budget(args)
    for path in args.inputs:
        doc = _read(path)
        rels = _relations(doc)
        group = args.group
        if group is None:
            group = _group_of(doc, rels)
        for r in rels:
            facts = product.closure_facts(r, budget)
            rep.emit("closure", relation=r.name,
                     dims={str(d): sorted(facts.names(d)) for d in range(1, r.dims + 1)})
        prof = classify.dimension_profile(rels, budget)
        rep.emit("profile", input=path, verdict=prof.verdict.name, offenders=prof.offenders or None)
        if args.binary:
            binary = [r for r in rels if r.arity == 2 * group]
            skipped = sorted(r.name for r in rels if r.arity != 2 * group)
            v = classify.classify_binary_expansion(binary, group, budget)
            rep.emit("binary", input=path, verdict=v.label,
                     witnesses={k: cnf_to_sexpr(w) for k, w in sorted(v.witnesses.items())},
                     offenders=list(v.offenders) or None, skipped=skipped or None)


def _normal(phi: Cnf, budget):
    if phi.regime == Regime.RAW:
        phi = to_cnf(phi)
    return normalize_with_stats(phi, budget)


def cmd_normalize(args, rep: Report) -> None:
    budget = _budget(args)
    for path in args.inputs:
        doc = _read(path)
        for r in doc.relations.values():
            out, st = _normal(r.definition, budget)
            rep.emit("normal", relation=r.name, formula=cnf_to_sexpr(out),
                     r5=st.r5_steps, r6=st.r6_steps)
        for tag, node in doc.formulas:
            out, st = _normal(parse_formula(node, doc.dims or 1), budget)
            rep.emit("normal", formula_tag=tag, formula=cnf_to_sexpr(out),
                     r5=st.r5_steps, r6=st.r6_steps)


def cmd_translate(args, rep: Report) -> None:
    for path in args.inputs:
        inst = calculi.translate(calculi.network_from_document(_read(path)))
        if rep.fmt == "jsonl":
            rep.emit("instance", input=path, text=instance_to_text(inst))
        else:
            rep.out.write(instance_to_text(inst))


def cmd_oracle(args, rep: Report) -> None:
    budget = _budget(args)
    for path in args.inputs:
        doc = _read(path)
        if doc.constraints or doc.calculus is not None:
            phi = _instance(doc).formula()
            sol = oracle.oracle_sat(to_cnf(phi) if phi.regime == Regime.RAW else phi, budget)
            rep.emit("oracle", input=path, verdict="SAT" if sol else "UNSAT", witness=_witness(sol))
        for tag, node in doc.formulas:
            phi = parse_formula(node, doc.dims or 1)
            if phi.regime == Regime.RAW:
                phi = to_cnf(phi)
            sol = oracle.oracle_sat(phi, budget)
            rep.emit("oracle", formula_tag=tag, verdict="SAT" if sol else "UNSAT",
                     witness=_witness(sol))


def cmd_catalog(args, rep: Report) -> None:
    budget = _budget(args)
    rels: List[Relation] = []
    for path in args.inputs:
        rels.extend(_relations(_read(path)))
    cat = product.build_catalog(rels, budget)
    text = product.catalog_to_text(cat)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
        rep.emit("catalog", output=args.output, entries=len(cat),
                 tractable=sorted(n for n, e in cat.items() if e.tractable))
    elif rep.fmt == "jsonl":
        rep.emit("catalog", text=text)
    else:
        rep.out.write(text)


def cmd_gen(args, rep: Report) -> None:
    if args.kind == "formulas":
        text = gen.corpus_text(args.seed, args.count, args.vars, args.clauses, args.dims,
                               args.prone)
    elif args.kind == "relations":
        rng = random.Random(args.seed)
        rels = [gen.random_relation(rng, "r%d" % i, rng.randint(2, 3), args.dims, args.clauses)
                for i in range(args.count)]
        text = "(dims %d)\n" % args.dims + "".join(relation_to_sexpr(r) + "\n" for r in rels)
    elif args.kind == "instance":
        rng = random.Random(args.seed)
        rels = [gen.random_relation(rng, "r%d" % i, rng.randint(2, 3), args.dims, args.clauses)
                for i in range(3)]
        text = instance_to_text(gen.random_instance(rng, rels, args.vars, args.count))
    else:
        grid = gen.ll_horn_grid() if args.kind == "ll-grid" else gen.min_form_grid()
        scan = gen.scan_ll_horn_grid(grid) if args.kind == "ll-grid" else gen.scan_min_form_grid(grid)
        rep.emit("grid", kind=args.kind, clauses=len(grid.clauses), sets=len(grid.subsets),
                 burnside=gen.burnside_count(grid.perm, grid.subsets.shape[1]),
                 **{k: v for k, v in scan.items() if k != "failures"},
                 failures=len(scan["failures"]))
        return
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        rep.out.write(text)


# -- argument parsing ------------------------------------------------------------------

def _int_in(lo: int, hi: int):
    def conv(s: str) -> int:
        v = int(s)
        if not lo <= v <= hi:
            raise argparse.ArgumentTypeError("must be within %d..%d" % (lo, hi))
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("sexpr", "jsonl"), default="sexpr")
    common.add_argument("--max-oracle-vars", type=_int_in(0, HARD_MAX_VARS), default=8)
    common.add_argument("--max-dims", type=_int_in(1, HARD_MAX_DIMS), default=3)
    common.add_argument("--timings", action="store_true", help="add wall-clock times to the report")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="artifact",
                                description="Order constraints over products of the rationals: "
                                            "solving, classification and normal forms.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="decide an instance or calculus network")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--catalog", help="precomputed catalog sidecar")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("classify", parents=[common], help="closure facts and complexity verdicts")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--binary", action="store_true", help="Ord-Horn test of the binary expansion")
    s.add_argument("--group", type=int, help="points per element (2 for interval encodings)")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("normalize", parents=[common], help="normal form of relations and formulas")
    s.add_argument("inputs", nargs="+")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("translate", parents=[common], help="calculus network to point instance")
    s.add_argument("inputs", nargs="+")
    s.set_defaults(func=cmd_translate)

    s = sub.add_parser("oracle", parents=[common], help="brute-force satisfiability")
    s.add_argument("inputs", nargs="+")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("catalog", parents=[common], help="build a catalog sidecar")
    s.add_argument("inputs", nargs="+")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_catalog)

    s = sub.add_parser("gen", parents=[common], help="seeded random corpora and exhaustive grids")
    s.add_argument("kind", choices=("formulas", "relations", "instance", "ll-grid", "min-grid"))
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--vars", type=int, default=4)
    s.add_argument("--clauses", type=int, default=3)
    s.add_argument("--dims", type=_int_in(1, HARD_MAX_DIMS), default=2)
    s.add_argument("--prone", type=float, default=0.0,
                   help="fraction of formulas built around a rewritable clause pair")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)
    return p


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s: %(message)s")
    rep = Report(out or sys.stdout, args.format, args.timings)
    try:
        args.func(args, rep)
    except (BudgetExceeded, NormalizationCapExceeded) as e:
        print("budget exceeded: %s" % e, file=sys.stderr)
        return EXIT_BUDGET
    except ParseError as e:
        print("parse error: %s" % e, file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
