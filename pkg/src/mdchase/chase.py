"""The MD chase: modifiable positions, single steps, and exhaustive search for
resolved and minimally resolved instances.

A chase step takes every pair of tuples whose left-hand similarities hold and
makes their right-hand positions equal, changing only modifiable positions.
Positions forced equal (transitively) form a class; each unsettled class gets
one common value, drawn from the values its members already hold or a single
fresh constant minted for that class in that step.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterator

from mdchase.language import MatchingDependency, MDSet
from mdchase.model import Fresh, Instance, Position, Value, diff, value_key
from mdchase.unionfind import UnionFind

log = logging.getLogger(__name__)

CONJUNCTIVE = "conjunctive"
DISJUNCTIVE = "disjunctive"
MODES = (CONJUNCTIVE, DISJUNCTIVE)

DEFAULT_NODE_CAP = 100_000


def default_depth_bound(m: MDSet) -> int:
    return len(m) + 2


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"modifiability mode must be one of {MODES}, not {mode!r}")


def matching_pairs(d: Instance, m: MDSet) -> Iterator[tuple[MatchingDependency, int, int]]:
    """Every (md, t_R, t_S) whose left-hand similarity condition holds in ``d``.

    Pairs include a tuple with itself when both sides are the same relation.
    """
    schema = d.schema
    for md in m:
        left = d.tuples(md.left_rel)
        right = d.tuples(md.right_rel)
        checks = [(schema.index(a.left), schema.index(a.right), m.registry.resolve(a.sim))
                  for a in md.lhs]
        for t1, row1 in left.items():
            for t2, row2 in right.items():
                if all(sim(row1[i], row2[j]) for i, j, sim in checks):
                    yield md, t1, t2


def forced_edges(d: Instance, m: MDSet) -> list[tuple[Position, Position]]:
    """Pairs of distinct positions that the next step must make equal."""
    edges = []
    for md, t1, t2 in matching_pairs(d, m):
        for a, b in md.rhs:
            p, q = Position(t1, a), Position(t2, b)
            if p != q:
                edges.append((p, q))
    return edges


def modifiable_positions(d: Instance, m: MDSet, mode: str = CONJUNCTIVE) -> frozenset[Position]:
    """Positions allowed to change in the next step.

    Conjunctive (default): some MD matches the tuple with another whose paired
    value differs. Disjunctive: some MD matches the position with another
    position, whether or not their values differ.
    """
    _check_mode(mode)
    out = set()
    for p, q in forced_edges(d, m):
        if mode == DISJUNCTIVE or d[p] != d[q]:
            out.update((p, q))
    return frozenset(out)


@dataclass(frozen=True)
class ForcedClass:
    members: tuple[Position, ...]
    values: tuple[Value, ...]
    modifiable: frozenset[Position]
    fresh: Fresh | None

    @property
    def settled(self) -> bool:
        return len(set(self.values)) == 1

    @property
    def candidates(self) -> tuple[Value, ...]:
        vals = tuple(sorted(set(self.values), key=value_key))
        return vals + ((self.fresh,) if self.fresh is not None else ())

    @property
    def fixed_values(self) -> set[Value]:
        """Values held by members that may not change."""
        return {v for p, v in zip(self.members, self.values) if p not in self.modifiable}

    @property
    def choices(self) -> tuple[Value, ...]:
        """Admissible common values: empty for a dead end."""
        fixed = self.fixed_values
        if len(fixed) > 1:
            return ()
        if fixed:
            return tuple(fixed)
        return self.candidates

    def to_dict(self) -> dict:
        return {
            "members": [str(p) for p in self.members],
            "values": [str(v) for v in self.values],
            "modifiable": [str(p) for p in self.members if p in self.modifiable],
            "candidates": [str(v) for v in self.candidates],
            "settled": self.settled,
        }


def forced_classes(d: Instance, m: MDSet, mode: str = CONJUNCTIVE) -> list[ForcedClass]:
    """Connected components of the forced-equality relation, with two or more members.

    Unsettled classes each get their own fresh candidate, numbered after the
    fresh constants already present in ``d``.
    """
    edges = forced_edges(d, m)
    mod = modifiable_positions(d, m, mode)
    uf: UnionFind[Position] = UnionFind()
    for p, q in edges:
        uf.union(p, q)
    classes = sorted((tuple(sorted(c)) for c in uf.classes() if len(c) > 1))
    out = []
    next_fresh = d.next_fresh_index()
    for members in classes:
        values = tuple(d[p] for p in members)
        fresh = None
        if len(set(values)) > 1:
            fresh = Fresh(next_fresh)
            next_fresh += 1
        out.append(ForcedClass(members, values, mod & frozenset(members), fresh))
    return out


def is_resolved(d: Instance, m: MDSet) -> bool:
    """Whether ``d`` satisfies every MD read as an equality-generating dependency."""
    return all(d[p] == d[q] for p, q in forced_edges(d, m))


@dataclass(frozen=True)
class ChaseNode:
    instance: Instance
    depth: int
    changes: frozenset[Position]
    origin: Instance = field(repr=False, compare=False)
    assignment: tuple[tuple[tuple[Position, ...], Value], ...] = ()

    @classmethod
    def root(cls, d: Instance) -> "ChaseNode":
        return cls(d, 0, frozenset(), d)

    @property
    def change_count(self) -> int:
        return len(self.changes)


@dataclass
class StepResult:
    nodes: list[ChaseNode]
    classes: list[ForcedClass]
    dead_ends: list[ForcedClass]


def expand(node: ChaseNode, m: MDSet, mode: str = CONJUNCTIVE) -> StepResult:
    """All single-step successors of ``node``, plus the classes that block it."""
    d = node.instance
    classes = forced_classes(d, m, mode)
    open_classes = [c for c in classes if not c.settled]
    dead = [c for c in open_classes if not c.choices]
    if dead or not open_classes:
        return StepResult([], classes, dead)
    nodes = []
    for combo in itertools.product(*(c.choices for c in open_classes)):
        changes = {}
        for cls, val in zip(open_classes, combo):
            for p, old in zip(cls.members, cls.values):
                if old != val:
                    changes[p] = val
        new = d.update(changes)
        changed, _ = diff(node.origin, new)
        nodes.append(ChaseNode(new, node.depth + 1, changed, node.origin,
                               tuple((c.members, v) for c, v in zip(open_classes, combo))))
    return StepResult(nodes, classes, [])


def successors(node: ChaseNode, m: MDSet, mode: str = CONJUNCTIVE) -> list[ChaseNode]:
    return expand(node, m, mode).nodes


def validate_step(d1: Instance, d2: Instance, m: MDSet, mode: str = CONJUNCTIVE) -> bool:
    """Check that ``d1 -> d2`` is a legal chase step.

    Every pair matched in ``d1`` must be equal in ``d2``, and only positions
    modifiable in ``d1`` may differ.
    """
    changed, _ = diff(d1, d2)
    if not all(d2[p] == d2[q] for p, q in forced_edges(d1, m)):
        return False
    return changed <= modifiable_positions(d1, m, mode)


@dataclass
class ResolvedSet:
    """Resolved instances found by the search, canonicalized and sorted.

    ``exhausted`` means every reachable instance was explored; ``truncated``
    means the depth bound cut off unexplored instances and ``capped`` that the
    node cap stopped the search.
    """

    instances: list[Instance]
    changes: dict[Instance, int]
    exhausted: bool
    truncated: bool
    capped: bool
    depth_bound: int
    nodes_expanded: int
    dead_ends: int
    trace: dict | None = None

    @property
    def complete(self) -> bool:
        return not (self.truncated or self.capped)

    def __iter__(self):
        return iter(self.instances)

    def __len__(self) -> int:
        return len(self.instances)

    def __contains__(self, d: Instance) -> bool:
        return d.canonical() in self.changes


def enumerate_resolved(d: Instance, m: MDSet, depth_bound: int | None = None, *,
                       node_cap: int = DEFAULT_NODE_CAP, mode: str = CONJUNCTIVE,
                       trace: bool = False) -> ResolvedSet:
    """Breadth-first search over chase sequences of at most ``depth_bound`` steps.

    Instances equal up to renaming of fresh constants are explored once.
    """
    _check_mode(mode)
    if depth_bound is None:
        depth_bound = default_depth_bound(m)
    if depth_bound < 1:
        raise ValueError("depth_bound must be >= 1")
    if node_cap < 1:
        raise ValueError("node_cap must be >= 1")

    root = ChaseNode.root(d)
    ids: dict[Instance, int] = {d.canonical(): 0}
    tr_nodes = [root] if trace else None
    tr_edges: list[dict] = []
    tr_dead: list[dict] = []
    resolved: dict[Instance, int] = {}
    frontier = [root]
    expanded = 0
    dead_ends = 0
    capped = False
    truncated = False
    exhausted = True

    for depth in range(depth_bound + 1):
        nxt = []
        for node in frontier:
            if is_resolved(node.instance, m):
                resolved.setdefault(node.instance.canonical(), node.change_count)
                continue
            if depth == depth_bound:
                # successors of a bound node: anything unseen means the bound cut the search
                for s in successors(node, m, mode):
                    if s.instance.canonical() not in ids:
                        truncated = True
                        exhausted = False
                        break
                continue
            if expanded >= node_cap:
                capped = True
                exhausted = False
                break
            expanded += 1
            step = expand(node, m, mode)
            if step.dead_ends:
                dead_ends += 1
                log.debug("dead end at depth %d: %s", depth, node.instance)
                if trace:
                    tr_dead.append({"node": ids[node.instance.canonical()],
                                    "classes": [c.to_dict() for c in step.dead_ends]})
            src = ids[node.instance.canonical()]
            for s in step.nodes:
                canon = s.instance.canonical()
                if canon not in ids:
                    ids[canon] = len(ids)
                    node_c = ChaseNode(canon, s.depth, s.changes, s.origin, s.assignment)
                    nxt.append(node_c)
                    if trace:
                        tr_nodes.append(node_c)
                if trace:
                    tr_edges.append({
                        "from": src,
                        "to": ids[canon],
                        "assignment": [
                            {"class": [str(p) for p in members], "value": str(v)}
                            for members, v in s.assignment
                        ],
                        "valid": validate_step(node.instance, s.instance, m, mode),
                    })
        if capped:
            break
        frontier = nxt
        if not frontier:
            break

    instances = sorted(resolved, key=lambda i: (resolved[i], i.sort_key()))
    doc = None
    if trace:
        doc = {
            "depth_bound": depth_bound,
            "mode": mode,
            "nodes": [
                {
                    "id": ids[n.instance.canonical()],
                    "depth": n.depth,
                    "resolved": is_resolved(n.instance, m),
                    "changes": n.change_count,
                    "instance": n.instance.to_dict(),
                }
                for n in tr_nodes
            ],
            "edges": tr_edges,
            "dead_ends": tr_dead,
        }
    return ResolvedSet(instances, {i: resolved[i] for i in instances}, exhausted and not capped,
                       truncated, capped, depth_bound, expanded, dead_ends, doc)


@dataclass
class MRIResult:
    instances: list[Instance]
    min_changes: int | None
    verified: bool
    resolved: ResolvedSet

    def __iter__(self):
        return iter(self.instances)

    def __len__(self) -> int:
        return len(self.instances)


def minimally_resolved(d: Instance, m: MDSet, depth_bound: int | None = None, *,
                       node_cap: int = DEFAULT_NODE_CAP, mode: str = CONJUNCTIVE,
                       resolved: ResolvedSet | None = None) -> MRIResult:
    """Resolved instances with the fewest changed positions.

    ``verified`` is False when the search was truncated or capped, since an
    unexplored branch could hold a cheaper resolution.
    """
    if resolved is None:
        resolved = enumerate_resolved(d, m, depth_bound, node_cap=node_cap, mode=mode)
    if not resolved.instances:
        return MRIResult([], None, resolved.complete, resolved)
    best = min(resolved.changes.values())
    mris = [i for i in resolved.instances if resolved.changes[i] == best]
    return MRIResult(mris, best, resolved.complete, resolved)
