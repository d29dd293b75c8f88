"""Static analysis of MD sets: the MD graph, attribute components, equivalent
sets, non-inclusiveness, and the syntactic hard/easy verdicts.

All attribute sets are sets of relation-qualified attributes, so ``R[A]`` and
``S[A]`` never collide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from graphlib import CycleError, TopologicalSorter
from typing import Iterable

from mdchase.language import MatchingDependency, MDSet, SimAtom
from mdchase.model import Attr
from mdchase.unionfind import UnionFind


class AnalysisError(ValueError):
    """The MD set is outside the shape the analysis supports."""


def _fmt_attrs(attrs: Iterable[Attr]) -> str:
    return "{" + ", ".join(str(a) for a in sorted(attrs)) + "}"


def _orient(md: MatchingDependency, r: str) -> MatchingDependency:
    if md.left_rel == r:
        return md
    lhs = tuple(SimAtom(a.right, a.left, a.sim) for a in md.lhs)
    rhs = tuple((b, a) for a, b in md.rhs)
    return MatchingDependency(md.name, lhs, rhs)


def check_shape(m: MDSet) -> MDSet:
    """Validate the at-most-two-relations shape and orient every MD as R ~ S.

    With two relations, each MD must mention both of them.
    """
    rels = m.relations
    if len(rels) > 2:
        raise AnalysisError(f"MD set mentions {len(rels)} relations {rels}; at most 2 are supported")
    if len(rels) == 2:
        for md in m:
            if len(md.relations) != 2:
                raise AnalysisError(
                    f"MD {md.name} mentions only {sorted(md.relations)}; with two relations "
                    f"every MD must involve both"
                )
        return m.with_mds(_orient(md, rels[0]) for md in m)
    return m


@dataclass(frozen=True)
class MDGraph:
    vertices: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    overlaps: dict = field(default_factory=dict, compare=False, hash=False)

    def successors(self, v: str) -> list[str]:
        return [b for a, b in sorted(self.edges) if a == v]

    @property
    def self_loops(self) -> list[str]:
        return sorted(a for a, b in self.edges if a == b)


def build_mdg(m: MDSet) -> MDGraph:
    """Edge m1 -> m2 iff RHS(m1) and LHS(m2) overlap (self-loops included)."""
    m = check_shape(m)
    edges = set()
    overlaps = {}
    for m1 in m:
        for m2 in m:
            common = m1.rhs_attrs & m2.lhs_attrs
            if common:
                edges.add((m1.name, m2.name))
                overlaps[(m1.name, m2.name)] = frozenset(common)
    return MDGraph(tuple(md.name for md in m), frozenset(edges), overlaps)


def _is_acyclic(g: MDGraph) -> bool:
    ts = TopologicalSorter({v: set() for v in g.vertices})
    for a, b in g.edges:
        ts.add(b, a)
    try:
        ts.prepare()
    except CycleError:
        return False
    return True


def partners(m: Iterable[MatchingDependency]) -> dict[Attr, set[Attr]]:
    """Attributes each attribute is compared with or matched to, over all MDs."""
    out: dict[Attr, set[Attr]] = {}
    for md in m:
        pairs = [(a.left, a.right) for a in md.lhs] + list(md.rhs)
        for a, b in pairs:
            out.setdefault(a, set()).add(b)
            out.setdefault(b, set()).add(a)
    return out


def is_pair_preserving(m: Iterable[MatchingDependency]) -> bool:
    return all(len(p) == 1 for p in partners(m).values())


@dataclass(frozen=True)
class StructureReport:
    acyclic: bool
    interacting: bool
    pair_preserving: bool
    linear_pair: tuple[str, str] | None
    self_loops: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "acyclic": self.acyclic,
            "interacting": self.interacting,
            "pair_preserving": self.pair_preserving,
            "linear_pair": list(self.linear_pair) if self.linear_pair else None,
            "self_loops": list(self.self_loops),
        }


def structure_report(m: MDSet) -> StructureReport:
    g = build_mdg(m)
    linear = None
    if len(g.vertices) == 2 and len(g.edges) == 1:
        (a, b), = g.edges
        if a != b:
            linear = (a, b)
    return StructureReport(
        acyclic=_is_acyclic(g),
        interacting=bool(g.edges),
        pair_preserving=is_pair_preserving(m),
        linear_pair=linear,
        self_loops=tuple(g.self_loops),
    )


@dataclass(frozen=True)
class AttributePartition:
    side: str
    md: str
    classes: tuple[frozenset[Attr], ...]

    def to_list(self) -> list[list[str]]:
        return [[str(a) for a in sorted(c)] for c in self.classes]


def _sorted_classes(classes: Iterable[frozenset[Attr]]) -> tuple[frozenset[Attr], ...]:
    return tuple(sorted(classes, key=lambda c: sorted(c)))


def components(md: MatchingDependency, side: str) -> AttributePartition:
    """L-components (side ``"L"``) or R-components (``"R"``) of one MD."""
    if side not in ("L", "R"):
        raise ValueError(f"side must be 'L' or 'R', not {side!r}")
    pairs = [(a.left, a.right) for a in md.lhs] if side == "L" else list(md.rhs)
    uf: UnionFind[Attr] = UnionFind()
    for a, b in pairs:
        uf.union(a, b)
    return AttributePartition(side, md.name, _sorted_classes(uf.classes()))


@dataclass(frozen=True)
class EquivalentSet:
    relation: str
    attrs: frozenset[Attr]
    bound: bool

    def to_dict(self) -> dict:
        return {"relation": self.relation, "attrs": [str(a) for a in sorted(self.attrs)],
                "bound": self.bound}


def _pair_mds(pair, m: MDSet | None):
    m1, m2 = pair
    if isinstance(m1, str):
        if m is None:
            raise ValueError("MD names need the MD set they belong to")
        m1, m2 = m[m1], m[m2]
    return m1, m2


def _require_linear(m1: MatchingDependency, m2: MatchingDependency, registry_source: MDSet | None):
    if m1.name == m2.name:
        raise AnalysisError("a linear pair needs two distinct MDs")
    rel = m1.left_rel
    m1, m2 = _orient(m1, rel), _orient(m2, rel)
    if m1.relations != m2.relations:
        raise AnalysisError(f"{m1.name} and {m2.name} do not involve the same relations")
    forward = m1.rhs_attrs & m2.lhs_attrs
    back = m2.rhs_attrs & m1.lhs_attrs
    loops = [md.name for md in (m1, m2) if md.rhs_attrs & md.lhs_attrs]
    if not forward or back or loops:
        raise AnalysisError(f"({m1.name}, {m2.name}) is not a linear pair")
    return m1, m2


def equivalent_sets(pair, m: MDSet | None = None) -> list[EquivalentSet]:
    """R- and S-equivalent sets of a linear pair ``(m1, m2)``.

    For a single-relation pair only the R side is reported; it also serves
    as the S side.
    """
    m1, m2 = _require_linear(*_pair_mds(pair, m), m)
    rels = [m1.left_rel] if m1.left_rel == m1.right_rel else [m1.left_rel, m1.right_rel]
    r_comps = components(m1, "R").classes
    l_comps = components(m2, "L").classes
    mentioned = m1.lhs_attrs | m1.rhs_attrs | m2.lhs_attrs | m2.rhs_attrs
    out = []
    for rel in rels:
        uf: UnionFind[Attr] = UnionFind(a for a in mentioned if a.rel == rel)
        for comp in r_comps + l_comps:
            members = sorted(a for a in comp if a.rel == rel)
            for a in members[1:]:
                uf.union(members[0], a)
        for cls in _sorted_classes(uf.classes()):
            if cls & m2.lhs_attrs:
                out.append(EquivalentSet(rel, cls, bool(cls & m1.lhs_attrs)))
    return out


def _check_def5_scope(m: Iterable[MatchingDependency]) -> None:
    m = list(m)
    if not is_pair_preserving(m):
        raise AnalysisError("non-inclusiveness is defined for pair-preserving MD sets only")
    names = [md.name for md in m]
    g = MDGraph(tuple(names), frozenset(
        (a.name, b.name) for a in m for b in m if a.rhs_attrs & b.lhs_attrs))
    if not _is_acyclic(g):
        raise AnalysisError("non-inclusiveness is defined for acyclic MD sets only")


def non_inclusive(b: Attr, mprime, m: MDSet | Iterable[MatchingDependency], *,
                  check: bool = True) -> bool:
    """Whether attribute ``b`` is non-inclusive with respect to ``mprime``.

    True iff every MD outside ``mprime`` with ``b`` on its right-hand side has
    a left-hand attribute that occurs in no left-hand side of ``mprime`` and
    is itself non-inclusive. The universal is vacuous when no such MD exists.
    """
    mds = list(m)
    if check:
        _check_def5_scope(mds)
    by_name = {md.name: md for md in mds}
    inside = {x if isinstance(x, str) else x.name for x in mprime}
    unknown = inside - set(by_name)
    if unknown:
        raise AnalysisError(f"unknown MDs {sorted(unknown)}")
    covered = frozenset(a for n in inside for a in by_name[n].lhs_attrs)
    outside = [md for md in mds if md.name not in inside]

    @lru_cache(maxsize=None)
    def rec(attr: Attr, depth: int) -> bool:
        if depth > len(mds):
            raise AnalysisError("non-inclusiveness recursion did not terminate; MD set is cyclic")
        for md in outside:
            if attr in md.rhs_attrs:
                if not any(c not in covered and rec(c, depth + 1) for c in sorted(md.lhs_attrs)):
                    return False
        return True

    return rec(b, 0)


# -- verdicts -----------------------------------------------------------------


@dataclass
class Theorem1Result:
    pair: tuple[str, str]
    rhs_disjoint: bool
    single_relation: bool
    conditions: dict[str, dict[str, bool]]
    equivalent_sets: list[EquivalentSet]
    hard: bool
    lines: list[str]

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "rhs_disjoint": self.rhs_disjoint,
            "single_relation": self.single_relation,
            "conditions": self.conditions,
            "equivalent_sets": [e.to_dict() for e in self.equivalent_sets],
            "hard": self.hard,
        }


def theorem1(m1: MatchingDependency, m2: MatchingDependency) -> Theorem1Result:
    """Evaluate the linear-pair hardness conditions (a)(i-iii) and (b)(i-iii)."""
    m1, m2 = _require_linear(m1, m2, None)
    r, s = m1.left_rel, m1.right_rel
    single = r == s
    ess = equivalent_sets((m1, m2))
    lines = []
    rhs_common = m1.rhs_attrs & m2.rhs_attrs
    disjoint = not rhs_common
    lines.append(
        f"RHS({m1.name}) ∩ RHS({m2.name}) = {_fmt_attrs(rhs_common)}"
        f" -> {'disjoint' if disjoint else 'not disjoint'}"
    )
    if single:
        lines.append(f"single relation {r}: conditions (a) and (b) coincide")
    l_comps = components(m1, "L").classes
    overlap = m1.rhs_attrs & m2.lhs_attrs
    conditions = {}
    for label, rel in (("a", r), ("b", s)):
        rel_overlap = {x for x in overlap if x.rel == rel}
        c_i = not rel_overlap
        rel_ess = [e for e in ess if e.relation == rel]
        c_ii = all(e.bound for e in rel_ess)
        missing = [c for c in l_comps if not any(x.rel == rel for x in c & m2.lhs_attrs)]
        c_iii = not missing
        conditions[label] = {"i": c_i, "ii": c_ii, "iii": c_iii}
        lines.append(
            f"({label})(i)   no {rel} attribute in RHS({m1.name}) ∩ LHS({m2.name}): {c_i}"
            f"  [{_fmt_attrs(rel_overlap)}]"
        )
        unbound = [e for e in rel_ess if not e.bound]
        lines.append(
            f"({label})(ii)  all {rel}-ESs bound: {c_ii}"
            + (f"  [unbound: {', '.join(_fmt_attrs(e.attrs) for e in unbound)}]" if unbound else "")
        )
        lines.append(
            f"({label})(iii) every L-component of {m1.name} meets LHS({m2.name}) in {rel}: {c_iii}"
            + (f"  [fails on {', '.join(_fmt_attrs(c) for c in missing)}]" if missing else "")
        )
    fails = [k for k, v in conditions.items() if not any(v.values())]
    hard = disjoint and bool(fails)
    if not disjoint:
        lines.append("Theorem 1 does not apply: right-hand sides overlap")
    elif fails:
        lines.append(f"condition(s) {', '.join('(' + f + ')' for f in fails)} fail -> hard")
    else:
        lines.append("conditions (a) and (b) both hold -> not hard by Theorem 1")
    return Theorem1Result((m1.name, m2.name), disjoint, single, conditions, ess, hard, lines)


@dataclass(frozen=True)
class Theorem3Witness:
    m1: str
    m2: str
    c: Attr
    b: Attr

    def to_dict(self) -> dict:
        return {"m1": self.m1, "m2": self.m2, "C": str(self.c), "B": str(self.b)}

    def __str__(self) -> str:
        return f"m1={self.m1}, m2={self.m2}, C={self.c}, B={self.b}"


def theorem3(m: MDSet) -> list[Theorem3Witness]:
    """All (m1, m2, C, B) with C in RHS(m2), B in RHS(m1) ∩ LHS(m2), C
    non-inclusive wrt {m1, m2} and B non-inclusive wrt {m2}.

    Requires a pair-preserving, acyclic set.
    """
    mds = list(check_shape(m))
    _check_def5_scope(mds)
    found = []
    for m1 in mds:
        for m2 in mds:
            for b in sorted(m1.rhs_attrs & m2.lhs_attrs):
                if not non_inclusive(b, {m2.name}, mds, check=False):
                    continue
                for c in sorted(m2.rhs_attrs):
                    if non_inclusive(c, {m1.name, m2.name}, mds, check=False):
                        found.append(Theorem3Witness(m1.name, m2.name, c, b))
    return found


HARD, EASY, UNKNOWN = "HARD", "EASY", "UNKNOWN"


@dataclass
class Verdict:
    """Outcome of the static analysis.

    ``by`` names the theorem behind a HARD or EASY outcome; ``theorem1`` and
    ``theorem3`` keep each path's independent result for cross-checking.
    """

    outcome: str
    by: str | None
    witness: dict | None
    trace: list[str]
    theorem1: Theorem1Result | None = None
    theorem3: list[Theorem3Witness] | None = None

    @property
    def is_hard(self) -> bool:
        return self.outcome == HARD

    @property
    def is_easy(self) -> bool:
        return self.outcome == EASY

    def label(self) -> str:
        return f"{self.outcome} ({self.by})" if self.by else self.outcome

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "by": self.by,
            "witness": self.witness,
            "theorem1": self.theorem1.to_dict() if self.theorem1 else None,
            "theorem3": [w.to_dict() for w in self.theorem3] if self.theorem3 is not None else None,
            "trace": list(self.trace),
        }


def hardness_verdict(m: MDSet, all_sims_transitive: bool | None = None) -> Verdict:
    """Combine the linear-pair criterion, the transitive dichotomy and the
    pair-preserving criterion into one verdict; UNKNOWN outside their scope."""
    if all_sims_transitive is None:
        all_sims_transitive = m.all_sims_transitive()
    m = check_shape(m)
    rep = structure_report(m)
    trace = [
        f"structure: acyclic={rep.acyclic} interacting={rep.interacting} "
        f"pair_preserving={rep.pair_preserving} linear_pair={rep.linear_pair}",
        "interacting is read as: the MD graph has at least one edge",
    ]
    if rep.self_loops:
        trace.append(f"self-loops {list(rep.self_loops)} are treated as cycles")
    trace.append(f"all similarity predicates transitive: {all_sims_transitive}")

    t1 = None
    t1_outcome = None
    if rep.linear_pair:
        t1 = theorem1(m[rep.linear_pair[0]], m[rep.linear_pair[1]])
        trace.append(f"Theorem 1 on linear pair {rep.linear_pair}:")
        trace.extend("  " + line for line in t1.lines)
        if t1.hard:
            t1_outcome = HARD
        elif t1.rhs_disjoint and all_sims_transitive:
            t1_outcome = EASY
            trace.append("  transitive similarities and not hard -> easy by the dichotomy (Theorem 2)")
        elif t1.rhs_disjoint:
            trace.append("  Theorem 2 needs transitive similarities; not applicable")
    else:
        trace.append("Theorem 1: not a linear pair, skipped")

    t3 = None
    if rep.pair_preserving and rep.acyclic:
        t3 = theorem3(m)
        trace.append(f"Theorem 3 (pair-preserving, acyclic): {len(t3)} witness(es)")
        trace.extend(f"  witness {w}" for w in t3)
    else:
        trace.append("Theorem 3: set is not pair-preserving and acyclic, skipped")

    if t1_outcome == HARD:
        outcome, by = HARD, "Theorem 1"
        witness = {"pair": list(t1.pair), "conditions": t1.conditions}
    elif t3:
        outcome, by = HARD, "Theorem 3"
        witness = t3[0].to_dict()
    elif t1_outcome == EASY:
        outcome, by = EASY, "Theorem 2"
        witness = {"pair": list(t1.pair), "conditions": t1.conditions}
    else:
        outcome, by, witness = UNKNOWN, None, None
    trace.append(f"verdict: {outcome}" + (f" ({by})" if by else ""))
    return Verdict(outcome, by, witness, trace, t1, t3)
