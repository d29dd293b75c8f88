"""Similarity predicates used on the left-hand sides of matching dependencies.

Every predicate is symmetric and subsumes equality. Transitivity is never
assumed; a declared ``transitive`` flag is carried for the static analyzer.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from mdchase.model import Fresh, Value

EQUALITY = "="

KINDS = ("equality", "edit_distance", "table")


class SimilarityError(ValueError):
    pass


@dataclass(frozen=True)
class SimilaritySpec:
    name: str
    kind: str = "equality"
    threshold: int | None = None
    pairs: frozenset[tuple[str, str]] = field(default_factory=frozenset)
    transitive: bool = False

    def __call__(self, x: Value, y: Value) -> bool:
        return sim_eval(self, x, y)


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert, delete, substitute)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _close_table(pairs: Iterable[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    closed = set()
    for x, y in pairs:
        closed.update({(x, y), (y, x), (x, x), (y, y)})
    return frozenset(closed)


def validate_similarity(spec: SimilaritySpec) -> SimilaritySpec:
    """Check a predicate definition and return it closed under symmetry and reflexivity.

    Explicit tables declared transitive are checked exhaustively; a
    counterexample raises :class:`SimilarityError` naming the triple.
    """
    if spec.kind not in KINDS:
        raise SimilarityError(f"similarity {spec.name!r}: unknown kind {spec.kind!r}")
    if spec.kind == "equality":
        return replace(spec, threshold=None, pairs=frozenset(), transitive=True)
    if spec.kind == "edit_distance":
        if not isinstance(spec.threshold, int) or isinstance(spec.threshold, bool) or spec.threshold < 0:
            raise SimilarityError(
                f"similarity {spec.name!r}: edit_distance needs an integer threshold >= 0, "
                f"got {spec.threshold!r}"
            )
        return replace(spec, pairs=frozenset())
    closed = _close_table(spec.pairs)
    if spec.transitive:
        succ: dict[str, set[str]] = {}
        for x, y in closed:
            succ.setdefault(x, set()).add(y)
        for x in sorted(succ):
            for y in sorted(succ[x]):
                for z in sorted(succ[y]):
                    if z not in succ[x]:
                        raise SimilarityError(
                            f"similarity {spec.name!r} declared transitive but "
                            f"{x!r}~{y!r} and {y!r}~{z!r} without {x!r}~{z!r}"
                        )
    return replace(spec, threshold=None, pairs=closed)


def sim_eval(spec: SimilaritySpec, x: Value, y: Value) -> bool:
    if isinstance(x, Fresh) or isinstance(y, Fresh):
        return x == y
    if x == y:
        return True
    if spec.kind == "equality":
        return False
    if spec.kind == "edit_distance":
        if abs(len(x) - len(y)) > spec.threshold:
            return False
        return levenshtein(x, y) <= spec.threshold
    return (x, y) in spec.pairs or (y, x) in spec.pairs


EQUALITY_SPEC = SimilaritySpec(EQUALITY, "equality", transitive=True)


class SimRegistry:
    """Named similarity predicates.

    ``=`` always denotes equality. A bare ``~`` in an MD resolves to the
    predicate named ``default`` when one is registered, else to equality.
    """

    def __init__(self, specs: Mapping[str, SimilaritySpec] | Iterable[SimilaritySpec] = ()):
        items = specs.values() if isinstance(specs, Mapping) else specs
        self._specs = {EQUALITY: EQUALITY_SPEC}
        for spec in items:
            if spec.name == EQUALITY:
                raise SimilarityError("'=' is reserved for equality")
            self._specs[spec.name] = validate_similarity(spec)

    def resolve(self, name: str | None) -> SimilaritySpec:
        if name is None:
            return self._specs.get("default", EQUALITY_SPEC)
        try:
            return self._specs[name]
        except KeyError:
            raise SimilarityError(f"unknown similarity {name!r}") from None

    def __contains__(self, name: str | None) -> bool:
        return name is None or name in self._specs

    def names(self) -> list[str]:
        return sorted(self._specs)
