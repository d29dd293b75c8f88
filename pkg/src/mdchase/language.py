"""Text syntax for matching dependencies and conjunctive queries.

MD files hold one dependency per line::

    # comment
    m1: R[A] = R[A] -> R[B] == R[B]
    P[Phone] ~ P[Phone] & P[Address] ~phone P[Address] -> P[Name] == P[Name]

``=`` on the left-hand side is built-in equality, ``~`` is the ``default``
similarity and ``~name`` a named one. Attribute lists such as ``R[B,C]`` pair
componentwise. Queries are datalog-style rules, ``Q(x,z) :- R(x,y,z)``, with
constants quoted.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from mdchase.model import Attr, Schema, StructuralError
from mdchase.similarity import EQUALITY, SimilarityError, SimRegistry


class ParseError(ValueError):
    """Syntax or reference error, annotated with its source location."""

    def __init__(self, message: str, *, line: int | None = None, col: int | None = None,
                 token: str | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.token = token
        self.source = source
        super().__init__(self._render())

    def _render(self) -> str:
        where = []
        if self.source:
            where.append(self.source)
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.col is not None:
            where.append(f"col {self.col}")
        loc = ":".join(where) if self.source else ", ".join(where)
        tok = f" at token {self.token!r}" if self.token is not None else ""
        return f"{loc}: {self.message}{tok}" if loc else f"{self.message}{tok}"

    def located(self, source: str | None = None, line: int | None = None) -> "ParseError":
        return ParseError(self.message, line=self.line if line is None else line, col=self.col,
                          token=self.token, source=source or self.source)


@dataclass(frozen=True)
class SimAtom:
    """``left ~sim right``; ``sim`` is ``"="``, a predicate name, or None for bare ``~``."""

    left: Attr
    right: Attr
    sim: str | None = EQUALITY


@dataclass(frozen=True)
class MatchingDependency:
    name: str
    lhs: tuple[SimAtom, ...]
    rhs: tuple[tuple[Attr, Attr], ...]

    @property
    def left_rel(self) -> str:
        return self.lhs[0].left.rel

    @property
    def right_rel(self) -> str:
        return self.lhs[0].right.rel

    @property
    def relations(self) -> frozenset[str]:
        return frozenset({self.left_rel, self.right_rel})

    @property
    def lhs_attrs(self) -> frozenset[Attr]:
        return frozenset(a for atom in self.lhs for a in (atom.left, atom.right))

    @property
    def rhs_attrs(self) -> frozenset[Attr]:
        return frozenset(a for pair in self.rhs for a in pair)

    def __str__(self) -> str:
        return print_md(self)


@dataclass(frozen=True)
class MDSet:
    mds: tuple[MatchingDependency, ...]
    schema: Schema
    registry: SimRegistry

    def __iter__(self) -> Iterator[MatchingDependency]:
        return iter(self.mds)

    def __len__(self) -> int:
        return len(self.mds)

    def __getitem__(self, name: str) -> MatchingDependency:
        for md in self.mds:
            if md.name == name:
                return md
        raise KeyError(name)

    @property
    def relations(self) -> list[str]:
        seen: dict[str, None] = {}
        for md in self.mds:
            seen.setdefault(md.left_rel)
            seen.setdefault(md.right_rel)
        return list(seen)

    def sims_used(self) -> set[str | None]:
        return {atom.sim for md in self.mds for atom in md.lhs}

    def all_sims_transitive(self) -> bool:
        return all(self.registry.resolve(s).transitive for s in self.sims_used())

    def with_mds(self, mds: Iterable[MatchingDependency]) -> "MDSet":
        return MDSet(tuple(mds), self.schema, self.registry)


# -- tokenizer ---------------------------------------------------------------

_ALIASES = {"∧": "&", "→": "->", "≈": "~", "≐": "==", "←": ":-"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"[^"]*"|'[^']*')
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)
  | (?P<sym>:-|->|==|[=~\[\],&:()∧→≈≐←])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    col: int

    @property
    def end(self) -> int:
        return self.col + len(self.text)


def _tokenize(text: str, line: int | None = None) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ParseError("unexpected character", line=line, col=i + 1, token=text[i])
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if kind == "sym":
                tok = _ALIASES.get(tok, tok)
            toks.append(_Tok(kind, tok, m.start() + 1))
        i = m.end()
    return toks


class _Cursor:
    def __init__(self, toks: list[_Tok], line: int | None):
        self.toks = toks
        self.i = 0
        self.line = line

    def peek(self, k: int = 0) -> _Tok | None:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def error(self, message: str, tok: _Tok | None = None) -> ParseError:
        tok = tok if tok is not None else self.peek()
        if tok is None:
            return ParseError(message, line=self.line, token="<end of line>")
        return ParseError(message, line=self.line, col=tok.col, token=tok.text)

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        tok = self.peek()
        if tok is None or (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = repr(text) if text else kind
            raise self.error(f"expected {want}")
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.kind == "sym" and tok.text == text:
            self.i += 1
            return True
        return False

    def done(self) -> bool:
        return self.i >= len(self.toks)


# -- MD parsing --------------------------------------------------------------


def _attr_list(cur: _Cursor) -> tuple[list[Attr], _Tok]:
    rel_tok = cur.take(kind="ident")
    cur.take("[")
    attrs = [Attr(rel_tok.text, cur.take(kind="ident").text)]
    while cur.accept(","):
        attrs.append(Attr(rel_tok.text, cur.take(kind="ident").text))
    cur.take("]")
    return attrs, rel_tok


def _pair_lists(cur: _Cursor, left, right, tok) -> list[tuple[Attr, Attr]]:
    if len(left) != len(right):
        raise cur.error(
            f"attribute lists of different lengths ({len(left)} vs {len(right)})", tok
        )
    return list(zip(left, right))


def _orient(cur, md_rels, pairs, tok):
    """Put every pair in (R, S) order; reject relations outside the MD's pair."""
    r, s = md_rels
    out = []
    for a, b in pairs:
        if (a.rel, b.rel) == (r, s):
            out.append((a, b))
        elif (a.rel, b.rel) == (s, r):
            out.append((b, a))
        else:
            raise cur.error(
                f"conjunct over {a.rel}/{b.rel} does not match the MD's relations {r}/{s}", tok
            )
    return out


def parse_md(text: str, *, name: str | None = None, schema: Schema | None = None,
             registry: SimRegistry | None = None, line: int | None = None) -> MatchingDependency:
    """Parse a single MD, optionally prefixed by ``name:``."""
    cur = _Cursor(_tokenize(text, line), line)
    t0, t1 = cur.peek(), cur.peek(1)
    if t0 is not None and t0.kind == "ident" and t1 is not None and t1.text == ":":
        name = t0.text
        cur.i += 2
    if name is None:
        raise cur.error("MD needs a name")

    lhs_raw: list[tuple[Attr, Attr, str | None, _Tok]] = []
    while True:
        left, tok = _attr_list(cur)
        op = cur.peek()
        if op is not None and op.text == "=":
            cur.i += 1
            sim = EQUALITY
        elif op is not None and op.text == "~":
            cur.i += 1
            sim = None
            nxt, after = cur.peek(), cur.peek(1)
            if (nxt is not None and nxt.kind == "ident" and nxt.col == op.end
                    and not (after is not None and after.text == "[")):
                sim = nxt.text
                cur.i += 1
        else:
            raise cur.error("expected '=' or '~' in left-hand side conjunct")
        right, _ = _attr_list(cur)
        for a, b in _pair_lists(cur, left, right, tok):
            lhs_raw.append((a, b, sim, tok))
        if cur.accept("&"):
            continue
        cur.take("->")
        break

    rhs_raw: list[tuple[Attr, Attr, _Tok]] = []
    while True:
        left, tok = _attr_list(cur)
        cur.take("==")
        right, _ = _attr_list(cur)
        for a, b in _pair_lists(cur, left, right, tok):
            rhs_raw.append((a, b, tok))
        if not cur.accept("&"):
            break
    if not cur.done():
        raise cur.error("unexpected trailing input")

    md_rels = (lhs_raw[0][0].rel, lhs_raw[0][1].rel)
    lhs = []
    for a, b, sim, tok in lhs_raw:
        (pair,) = _orient(cur, md_rels, [(a, b)], tok)
        lhs.append(SimAtom(pair[0], pair[1], sim))
        if registry is not None and sim not in registry:
            raise ParseError(f"unknown similarity {sim!r}", line=line, col=tok.col, token=sim)
        if schema is not None:
            for attr in pair:
                _check_attr(schema, attr, line, tok)
    rhs = []
    for a, b, tok in rhs_raw:
        (pair,) = _orient(cur, md_rels, [(a, b)], tok)
        rhs.append(pair)
        if schema is not None:
            for attr in pair:
                _check_attr(schema, attr, line, tok)
    return MatchingDependency(name, tuple(lhs), tuple(rhs))


def _check_attr(schema: Schema, attr: Attr, line, tok):
    if attr.rel not in schema:
        raise ParseError(f"unknown relation {attr.rel!r}", line=line, col=tok.col, token=attr.rel)
    if not schema.has_attr(attr):
        raise ParseError(f"unknown attribute {attr}", line=line, col=tok.col, token=str(attr))


def infer_schema(mds: Iterable[MatchingDependency]) -> Schema:
    """Schema listing each mentioned attribute in order of first appearance."""
    rels: dict[str, dict[str, None]] = {}
    for md in mds:
        pairs = [(a.left, a.right) for a in md.lhs] + list(md.rhs)
        for pair in pairs:
            for attr in pair:
                rels.setdefault(attr.rel, {}).setdefault(attr.name)
    return Schema({r: list(a) for r, a in rels.items()})


def parse_mds(text: str, schema: Schema | None = None, registry: SimRegistry | None = None,
              source: str | None = None) -> MDSet:
    """Parse an MD file. Unnamed MDs are called m1, m2, ... by position."""
    registry = registry if registry is not None else SimRegistry()
    mds = []
    names = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            md = parse_md(line, name=f"m{len(mds) + 1}", schema=schema, registry=registry,
                          line=lineno)
        except ParseError as e:
            raise e.located(source, lineno) from None
        if md.name in names:
            raise ParseError(f"duplicate MD name {md.name!r}", line=lineno, token=md.name,
                             source=source)
        names.add(md.name)
        mds.append(md)
    if schema is None:
        schema = infer_schema(mds)
    return MDSet(tuple(mds), schema, registry)


def _fmt_sim(sim: str | None) -> str:
    if sim == EQUALITY:
        return "="
    if sim is None:
        return "~"
    return f"~{sim}"


def print_md(md: MatchingDependency) -> str:
    lhs = " & ".join(f"{a.left} {_fmt_sim(a.sim)} {a.right}" for a in md.lhs)
    rhs = " & ".join(f"{a} == {b}" for a, b in md.rhs)
    return f"{md.name}: {lhs} -> {rhs}"


def print_mds(m: MDSet) -> str:
    return "".join(print_md(md) + "\n" for md in m)


def changeable_attributes(m: MDSet | Iterable[MatchingDependency]) -> frozenset[Attr]:
    return frozenset(a for md in m for a in md.rhs_attrs)


# -- conjunctive queries -----------------------------------------------------


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.rel}({', '.join(_fmt_term(t) for t in self.args)})"


def _fmt_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    return '"' + t + '"' if "'" in t else "'" + t + "'"


@dataclass(frozen=True)
class ConjunctiveQuery:
    head: tuple[Var, ...]
    body: tuple[Atom, ...]
    name: str = "Q"

    @property
    def variables(self) -> frozenset[Var]:
        return frozenset(t for a in self.body for t in a.args if isinstance(t, Var))

    @property
    def existential(self) -> frozenset[Var]:
        return self.variables - set(self.head)

    def check_safe(self) -> None:
        missing = [v.name for v in self.head if v not in self.variables]
        if missing:
            raise ParseError(f"unsafe query: head variables {missing} do not occur in the body",
                             token=missing[0])

    def __str__(self) -> str:
        head = ", ".join(v.name for v in self.head)
        return f"{self.name}({head}) :- {', '.join(str(a) for a in self.body)}"


def _term(cur: _Cursor):
    tok = cur.peek()
    if tok is None:
        raise cur.error("expected a variable or constant")
    cur.i += 1
    if tok.kind == "ident":
        return Var(tok.text)
    if tok.kind == "string":
        return tok.text[1:-1]
    if tok.kind == "number":
        return tok.text
    raise cur.error("expected a variable or constant", tok)


def _args(cur: _Cursor) -> list:
    cur.take("(")
    args = []
    if cur.accept(")"):
        return args
    args.append(_term(cur))
    while cur.accept(","):
        args.append(_term(cur))
    cur.take(")")
    return args


def parse_query(text: str, schema: Schema | None = None, source: str | None = None) -> ConjunctiveQuery:
    """Parse ``Q(x, y) :- R(x, z), S(z, 'c')``; body atoms separated by ``,`` or ``&``."""
    text = " ".join(l.split("#", 1)[0] for l in text.splitlines()).strip()
    try:
        cur = _Cursor(_tokenize(text), None)
        name = cur.take(kind="ident").text
        head = []
        for t in _args(cur):
            if not isinstance(t, Var):
                raise cur.error("query head must list variables only", cur.peek(-1))
            head.append(t)
        cur.take(":-")
        body = []
        while True:
            rel_tok = cur.take(kind="ident")
            args = _args(cur)
            if schema is not None and rel_tok.text in schema and schema.arity(rel_tok.text) != len(args):
                raise cur.error(
                    f"{rel_tok.text} has arity {schema.arity(rel_tok.text)}, got {len(args)} arguments",
                    rel_tok)
            body.append(Atom(rel_tok.text, tuple(args)))
            if not (cur.accept(",") or cur.accept("&")):
                break
        if not cur.done():
            raise cur.error("unexpected trailing input")
        q = ConjunctiveQuery(tuple(head), tuple(body), name)
        q.check_safe()
    except ParseError as e:
        # comments stripped and lines joined, so the query is reported as one line
        raise e.located(source, line=1) from None
    return q


class QueryClass(enum.Enum):
    NON_UJCQ = "NonUJCQ"
    UJCQ_ONLY = "UJCQOnly"
    CHAQ = "CHAQ"

    @property
    def is_ujcq(self) -> bool:
        return self is not QueryClass.NON_UJCQ

    def describe(self) -> str:
        return {
            QueryClass.NON_UJCQ: "not UJCQ",
            QueryClass.UJCQ_ONLY: "UJCQ (not CHAQ)",
            QueryClass.CHAQ: "CHAQ",
        }[self]


def slot_attributes(q: ConjunctiveQuery, schema: Schema) -> list[list[Attr | None]]:
    """The attribute of every argument slot, or None where the relation is unknown."""
    out = []
    for atom in q.body:
        if atom.rel in schema:
            attrs = schema.attributes(atom.rel)
            if len(attrs) != len(atom.args):
                raise ParseError(
                    f"{atom.rel} has arity {len(attrs)}, got {len(atom.args)} arguments",
                    token=atom.rel)
            out.append([Attr(atom.rel, a) for a in attrs])
        else:
            out.append([None] * len(atom.args))
    return out


def unchangeable_join_violations(q: ConjunctiveQuery, m: MDSet) -> list[tuple[Var, Attr]]:
    """Existential join variables occurring in a changeable-attribute slot."""
    changeable = changeable_attributes(m)
    slots = slot_attributes(q, m.schema)
    occurrences: dict[Var, list[Attr | None]] = {}
    for atom, attrs in zip(q.body, slots):
        for term, attr in zip(atom.args, attrs):
            if isinstance(term, Var):
                occurrences.setdefault(term, []).append(attr)
    bad = []
    for var in sorted(occurrences):
        occ = occurrences[var]
        if var in q.existential and len(occ) >= 2:
            for attr in occ:
                if attr is not None and attr in changeable:
                    bad.append((var, attr))
                    break
    return bad


def free_occurrences(q: ConjunctiveQuery, m: MDSet) -> list[Atom]:
    """Body atoms over an MD relation whose arguments are all head variables."""
    rels = set(m.relations)
    head = set(q.head)
    return [a for a in q.body
            if a.rel in rels and all(isinstance(t, Var) and t in head for t in a.args)]


def classify_query(q: ConjunctiveQuery, m: MDSet) -> QueryClass:
    q.check_safe()
    if unchangeable_join_violations(q, m):
        return QueryClass.NON_UJCQ
    if free_occurrences(q, m):
        return QueryClass.CHAQ
    return QueryClass.UJCQ_ONLY


__all__ = [
    "Atom", "ConjunctiveQuery", "MatchingDependency", "MDSet", "ParseError", "QueryClass",
    "SimAtom", "Var", "changeable_attributes", "classify_query", "infer_schema", "parse_md",
    "parse_mds", "parse_query", "print_md", "print_mds", "StructuralError", "SimilarityError",
]
