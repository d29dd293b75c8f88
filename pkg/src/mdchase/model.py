"""Schemas, tuple-identified instances, positions and values."""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union


class StructuralError(ValueError):
    """Raised when an instance, schema or position reference is malformed."""


@dataclass(frozen=True, order=True)
class Attr:
    """A relation-qualified attribute, written ``R[A]``."""

    rel: str
    name: str

    def __str__(self) -> str:
        return f"{self.rel}[{self.name}]"


@dataclass(frozen=True, order=True)
class Fresh:
    """A minted constant, dissimilar to every value except itself.

    Fresh constants never compare equal to ground (string) constants.
    """

    index: int

    def __str__(self) -> str:
        return f"_:f{self.index}"


Value = Union[str, Fresh]


def value_key(v: Value) -> tuple:
    """Sort key placing ground constants (lexicographic) before fresh ones."""
    if isinstance(v, Fresh):
        return (1, "", v.index)
    return (0, v, 0)


def format_value(v: Value) -> str:
    return str(v)


@dataclass(frozen=True, order=True)
class Position:
    """A cell ``(t, A)``: tuple id plus qualified attribute."""

    tid: int
    attr: Attr

    def __str__(self) -> str:
        return f"(t{self.tid},{self.attr.name})"


class Schema:
    """Relation names mapped to ordered attribute lists."""

    __slots__ = ("_relations",)

    def __init__(self, relations: Mapping[str, Sequence[str]] | Iterable[tuple[str, Sequence[str]]]):
        items = relations.items() if isinstance(relations, Mapping) else relations
        rels: dict[str, tuple[str, ...]] = {}
        for name, attrs in items:
            if name in rels:
                raise StructuralError(f"duplicate relation {name!r}")
            attrs = tuple(attrs)
            if len(set(attrs)) != len(attrs):
                raise StructuralError(f"duplicate attribute in relation {name!r}: {attrs}")
            rels[name] = attrs
        self._relations = MappingProxyType(rels)

    @property
    def relations(self) -> Mapping[str, tuple[str, ...]]:
        return self._relations

    def __contains__(self, rel: str) -> bool:
        return rel in self._relations

    def attributes(self, rel: str) -> tuple[str, ...]:
        try:
            return self._relations[rel]
        except KeyError:
            raise StructuralError(f"unknown relation {rel!r}") from None

    def index(self, attr: Attr) -> int:
        attrs = self.attributes(attr.rel)
        try:
            return attrs.index(attr.name)
        except ValueError:
            raise StructuralError(f"unknown attribute {attr}") from None

    def has_attr(self, attr: Attr) -> bool:
        return attr.rel in self._relations and attr.name in self._relations[attr.rel]

    def arity(self, rel: str) -> int:
        return len(self.attributes(rel))

    def merged(self, other: "Schema") -> "Schema":
        """Union of two schemas; relations present in both must agree."""
        rels = dict(self._relations)
        for name, attrs in other.relations.items():
            if name in rels and rels[name] != attrs:
                raise StructuralError(
                    f"relation {name!r} declared as {rels[name]} and {attrs}"
                )
            rels[name] = attrs
        return Schema(rels)

    def __eq__(self, other) -> bool:
        return isinstance(other, Schema) and dict(self._relations) == dict(other._relations)

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._relations.items())))

    def __repr__(self) -> str:
        body = "; ".join(f"{r}({','.join(a)})" for r, a in self._relations.items())
        return f"Schema({body})"


class Instance:
    """An immutable, tuple-identified database instance.

    Tuple ids are integers, unique across the whole instance, and are never
    changed by updates.
    """

    __slots__ = ("schema", "_rows", "_rel_of", "_key")

    def __init__(self, schema: Schema, rows: Mapping[str, Mapping[int, Sequence[Value]]]):
        self.schema = schema
        data: dict[str, dict[int, tuple[Value, ...]]] = {}
        rel_of: dict[int, str] = {}
        for rel in schema.relations:
            arity = schema.arity(rel)
            table = {}
            for tid, row in (rows.get(rel) or {}).items():
                row = tuple(row)
                if len(row) != arity:
                    raise StructuralError(
                        f"tuple t{tid} of {rel} has {len(row)} values, expected {arity}"
                    )
                if tid in rel_of:
                    raise StructuralError(f"duplicate tuple id {tid}")
                rel_of[tid] = rel
                table[tid] = row
            data[rel] = dict(sorted(table.items()))
        for rel in rows:
            if rel not in schema:
                raise StructuralError(f"unknown relation {rel!r}")
        self._rows = data
        self._rel_of = rel_of
        self._key = None

    @classmethod
    def from_rows(cls, schema: Schema, rows: Mapping[str, Sequence[Sequence[Value]]]) -> "Instance":
        """Build an instance assigning tuple ids 1, 2, ... in relation order."""
        tid = 0
        data: dict[str, dict[int, Sequence[Value]]] = {}
        for rel in schema.relations:
            table = {}
            for row in rows.get(rel, ()):
                tid += 1
                table[tid] = row
            data[rel] = table
        for rel in rows:
            if rel not in schema:
                raise StructuralError(f"unknown relation {rel!r}")
        return cls(schema, data)

    def tuples(self, rel: str) -> Mapping[int, tuple[Value, ...]]:
        if rel not in self._rows:
            raise StructuralError(f"unknown relation {rel!r}")
        return self._rows[rel]

    @property
    def tids(self) -> frozenset[int]:
        return frozenset(self._rel_of)

    def relation_of(self, tid: int) -> str:
        try:
            return self._rel_of[tid]
        except KeyError:
            raise StructuralError(f"unknown tuple id {tid}") from None

    def value(self, pos: Position) -> Value:
        rel = self.relation_of(pos.tid)
        if pos.attr.rel != rel:
            raise StructuralError(f"position {pos} does not belong to relation {rel}")
        return self._rows[rel][pos.tid][self.schema.index(pos.attr)]

    def __getitem__(self, pos: Position) -> Value:
        return self.value(pos)

    def positions(self) -> list[Position]:
        out = []
        for rel, table in self._rows.items():
            attrs = [Attr(rel, a) for a in self.schema.attributes(rel)]
            for tid in table:
                out.extend(Position(tid, a) for a in attrs)
        return out

    def update(self, changes: Mapping[Position, Value]) -> "Instance":
        """Return a copy with the given positions set to new values."""
        if not changes:
            return self
        rows = {rel: dict(table) for rel, table in self._rows.items()}
        for pos, val in changes.items():
            rel = self.relation_of(pos.tid)
            if pos.attr.rel != rel:
                raise StructuralError(f"position {pos} does not belong to relation {rel}")
            row = list(rows[rel][pos.tid])
            row[self.schema.index(pos.attr)] = val
            rows[rel][pos.tid] = tuple(row)
        return Instance(self.schema, rows)

    def fresh_values(self) -> set[Fresh]:
        return {v for table in self._rows.values() for row in table.values() for v in row
                if isinstance(v, Fresh)}

    def next_fresh_index(self) -> int:
        return max((f.index for f in self.fresh_values()), default=0) + 1

    def canonical(self) -> "Instance":
        """Renumber fresh constants 1, 2, ... in first-use order.

        The scan order is relations alphabetically, tuple ids ascending and
        attributes in schema order, so instances equal up to a bijective
        renaming of fresh constants get the same canonical form.
        """
        mapping: dict[Fresh, Fresh] = {}
        rows = {}
        for rel in sorted(self._rows):
            table = {}
            for tid, row in self._rows[rel].items():
                new = []
                for v in row:
                    if isinstance(v, Fresh):
                        if v not in mapping:
                            mapping[v] = Fresh(len(mapping) + 1)
                        v = mapping[v]
                    new.append(v)
                table[tid] = tuple(new)
            rows[rel] = table
        if all(k == v for k, v in mapping.items()):
            return self
        return Instance(self.schema, rows)

    def key(self) -> tuple:
        if self._key is None:
            self._key = tuple(
                (rel, tuple(self._rows[rel].items())) for rel in sorted(self._rows)
            )
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, Instance) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def sort_key(self) -> tuple:
        return tuple(
            (rel, tuple((tid, tuple(value_key(v) for v in row)) for tid, row in table))
            for rel, table in self.key()
        )

    def to_dict(self) -> dict:
        return {
            rel: [
                {"_tid": tid, **{a: format_value(v) for a, v in zip(self.schema.attributes(rel), row)}}
                for tid, row in self._rows[rel].items()
            ]
            for rel in sorted(self._rows)
        }

    def __repr__(self) -> str:
        parts = []
        for rel in sorted(self._rows):
            rows = ", ".join(
                f"t{tid}({','.join(format_value(v) for v in row)})"
                for tid, row in self._rows[rel].items()
            )
            parts.append(f"{rel}: {rows}")
        return f"Instance({'; '.join(parts)})"


def diff(original: Instance, updated: Instance) -> tuple[frozenset[Position], int]:
    """Positions whose values differ between two instances, and their count."""
    if original.schema != updated.schema:
        raise StructuralError("instances have different schemas")
    for rel in original.schema.relations:
        if original.tuples(rel).keys() != updated.tuples(rel).keys():
            raise StructuralError(f"tuple id sets of {rel} differ")
    changed = frozenset(p for p in original.positions() if original[p] != updated[p])
    return changed, len(changed)


def active_domain(d: Instance, attr: Attr) -> frozenset[Value]:
    """The set of values appearing in column ``attr`` of ``d``."""
    idx = d.schema.index(attr)
    return frozenset(row[idx] for row in d.tuples(attr.rel).values())
