"""S-expression reading and writing for formulas, relations and instances."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (Clause, Cnf, Instance, Literal, NAME_OPS, OP_NAMES, Op,
                   Relation)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__("%d:%d: %s" % (line, col, msg))
        self.line = line
        self.col = col


@dataclass
class Node:
    """Atom (``items is None``) or list, with its source position."""

    atom: Optional[str]
    items: Optional[List["Node"]]
    line: int
    col: int

    def err(self, msg: str) -> ParseError:
        return ParseError(msg, self.line, self.col)

    @property
    def head(self) -> Optional[str]:
        if self.items and self.items[0].atom is not None:
            return self.items[0].atom
        return None

    def __repr__(self) -> str:
        if self.atom is not None:
            return self.atom
        return "(" + " ".join(map(repr, self.items)) + ")"


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")


def read_all(text: str) -> List[Node]:
    """Parse every top-level expression in ``text``."""
    stack: List[List[Node]] = [[]]
    opens: List[Tuple[int, int]] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        tok = m.group(0)
        if tok == "(":
            stack.append([])
            opens.append((line, col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            items = stack.pop()
            l0, c0 = opens.pop()
            stack[-1].append(Node(None, items, l0, c0))
        elif not tok[0].isspace() and tok[0] != ";":
            stack[-1].append(Node(tok, None, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    if len(stack) != 1:
        l0, c0 = opens[-1]
        raise ParseError("unclosed '('", l0, c0)
    return stack[0]


def _int(node: Node, what: str) -> int:
    if node.atom is None or not re.fullmatch(r"\d+", node.atom):
        raise node.err("expected %s, got %r" % (what, node))
    return int(node.atom)


def _sym(node: Node, what: str = "symbol") -> str:
    if node.atom is None:
        raise node.err("expected %s, got %r" % (what, node))
    return node.atom


def parse_literal(node: Node) -> Literal:
    h = node.head
    if h == "not":
        if len(node.items) != 2:
            raise node.err("(not L) takes one literal")
        inner = parse_literal(node.items[1])
        return Literal.make(inner.op, inner.dim, inner.lhs, inner.rhs, not inner.negated)
    if h not in NAME_OPS:
        raise node.err("unknown literal %r" % (node,))
    op = NAME_OPS[h]
    args = node.items[1:]
    if op in (Op.EQV, Op.NEQV):
        if len(args) != 2:
            raise node.err("(%s x y) takes two variables" % h)
        return Literal.make(op, 0, _sym(args[0]), _sym(args[1]))
    if len(args) != 3:
        raise node.err("(%s d x y) takes a dimension and two variables" % h)
    d = _int(args[0], "dimension")
    if d < 1:
        raise args[0].err("dimensions start at 1")
    return Literal.make(op, d, _sym(args[1]), _sym(args[2]))


def parse_clause(node: Node) -> Clause:
    if node.head == "or":
        return Clause.of(parse_literal(n) for n in node.items[1:])
    return Clause.of([parse_literal(node)])


def parse_formula(node: Node, dims: int, vars: Optional[Sequence[str]] = None) -> Cnf:
    if node.atom is not None:
        raise node.err("expected a formula")
    if node.head == "and":
        clauses = [parse_clause(n) for n in node.items[1:]]
    else:
        clauses = [parse_clause(node)]
    try:
        return Cnf.make(clauses, dims, vars)
    except ValueError as e:
        raise node.err(str(e)) from None


def formula_from_string(text: str, dims: int, vars: Optional[Sequence[str]] = None) -> Cnf:
    nodes = read_all(text)
    if len(nodes) != 1:
        raise ParseError("expected exactly one formula")
    return parse_formula(nodes[0], dims, vars)


# -- writing ---------------------------------------------------------------

def literal_to_sexpr(l: Literal) -> str:
    if l.op in (Op.EQV, Op.NEQV):
        s = "(%s %s %s)" % (OP_NAMES[l.op], l.lhs, l.rhs)
    else:
        s = "(%s %d %s %s)" % (OP_NAMES[l.op], l.dim, l.lhs, l.rhs)
    return "(not %s)" % s if l.negated else s


def clause_to_sexpr(c: Clause) -> str:
    if len(c) == 1:
        return literal_to_sexpr(c.literals[0])
    return "(or" + "".join(" " + literal_to_sexpr(l) for l in c) + ")"


def cnf_to_sexpr(phi: Cnf) -> str:
    if len(phi.clauses) == 1:
        return clause_to_sexpr(phi.clauses[0])
    return "(and" + "".join(" " + clause_to_sexpr(c) for c in phi.clauses) + ")"


def relation_to_sexpr(r: Relation) -> str:
    return "(relation %s %d (%s) %s)" % (r.name, r.arity, " ".join(r.params),
                                         cnf_to_sexpr(r.definition))


def relations_to_text(rels: Sequence[Relation]) -> str:
    dims = rels[0].dims if rels else 1
    lines = ["(dims %d)" % dims]
    lines.extend(relation_to_sexpr(r) for r in rels)
    return "\n".join(lines) + "\n"


def instance_to_text(inst: Instance) -> str:
    used = sorted({n for n, _ in inst.constraints})
    rels = [inst.relations[n] for n in used]
    out = relations_to_text(rels) if rels else "(dims %d)\n" % inst.dims
    out += "(vars %s)\n" % " ".join(inst.vars)
    for name, args in inst.constraints:
        out += "(constraint %s %s)\n" % (name, " ".join(args))
    return out


# -- files -----------------------------------------------------------------

@dataclass
class Document:
    """Everything found in one file."""

    dims: Optional[int]
    relations: Dict[str, Relation]
    vars: List[str]
    constraints: List[Tuple[str, Tuple[str, ...]]]
    calculus: Optional[Tuple[str, int]]
    nodes: List[str]
    edges: List[Tuple[str, str, Node]]
    formulas: List[Tuple[str, Node]]


def parse_document(text: str) -> Document:
    """Read relation, instance, network and formula entries.

    Entries: ``(dims n)``, ``(relation NAME ARITY (p ...) F)``, ``(vars ...)``,
    ``(constraint NAME a ...)``, ``(calculus allen|cdc N|block N)``,
    ``(node a)``, ``(edge a b LABEL)``, ``(formula TAG F)``.
    """
    doc = Document(None, {}, [], [], None, [], [], [])
    for node in read_all(text):
        h = node.head
        args = node.items[1:] if node.items else []
        if h == "dims":
            if len(args) != 1:
                raise node.err("(dims n)")
            doc.dims = _int(args[0], "dimension count")
            if doc.dims < 1:
                raise node.err("need at least one dimension")
        elif h == "relation":
            if len(args) != 4 or args[2].items is None:
                raise node.err("(relation NAME ARITY (params) formula)")
            name = _sym(args[0], "relation name")
            arity = _int(args[1], "arity")
            params = [_sym(p, "parameter") for p in args[2].items]
            if len(params) != arity:
                raise node.err("relation %s: arity %d but %d params" % (name, arity, len(params)))
            if name in doc.relations:
                raise node.err("relation %s defined twice" % name)
            phi = parse_formula(args[3], doc.dims or 1, params)
            try:
                doc.relations[name] = Relation.define(name, params, phi)
            except ValueError as e:
                raise node.err(str(e)) from None
        elif h == "vars":
            doc.vars.extend(_sym(a, "variable") for a in args)
        elif h == "constraint":
            if not args:
                raise node.err("(constraint NAME args...)")
            doc.constraints.append((_sym(args[0]), tuple(_sym(a) for a in args[1:])))
        elif h == "calculus":
            if not args:
                raise node.err("(calculus allen|cdc N|block N)")
            kind = _sym(args[0])
            if kind == "allen":
                doc.calculus = ("allen", 1)
            elif kind in ("cdc", "block"):
                n = _int(args[1], "dimension count") if len(args) > 1 else 2
                doc.calculus = (kind, n)
            else:
                raise args[0].err("unknown calculus %s" % kind)
        elif h == "node":
            doc.nodes.extend(_sym(a, "node") for a in args)
        elif h == "edge":
            if len(args) != 3:
                raise node.err("(edge a b LABEL)")
            doc.edges.append((_sym(args[0]), _sym(args[1]), args[2]))
        elif h == "formula":
            if len(args) != 2:
                raise node.err("(formula TAG F)")
            doc.formulas.append((_sym(args[0]), args[1]))
        else:
            raise node.err("unknown entry %r" % (h or node,))
    return doc


def document_instance(doc: Document) -> Instance:
    """Instance from ``vars``/``constraint`` entries, checked."""
    vs = list(dict.fromkeys(doc.vars))
    if not vs:
        # no declaration: variables in order of first use
        for _, args in doc.constraints:
            for a in args:
                if a not in vs:
                    vs.append(a)
    try:
        return Instance(tuple(vs), tuple(doc.constraints), dict(doc.relations))
    except ValueError as e:
        raise ParseError(str(e)) from None
