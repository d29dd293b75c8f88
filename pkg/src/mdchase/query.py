"""Conjunctive query evaluation and resolved (certain) answers over MRIs."""

from __future__ import annotations

from dataclasses import dataclass

from mdchase.chase import CONJUNCTIVE, DEFAULT_NODE_CAP, MRIResult, minimally_resolved
from mdchase.language import ConjunctiveQuery, MDSet, ParseError, Var
from mdchase.model import Fresh, Instance, StructuralError, Value, value_key


@dataclass(frozen=True)
class AnswerSet:
    tuples: frozenset[tuple[Value, ...]]
    arity: int
    provenance: str
    mri_count: int | None = None
    min_changes: int | None = None
    truncated: bool = False
    indeterminate: bool = False

    def __contains__(self, item) -> bool:
        return tuple(item) in self.tuples

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.tuples)

    def sorted(self) -> list[tuple[Value, ...]]:
        return sorted(self.tuples, key=lambda t: tuple(value_key(v) for v in t))


def _check_schema(q: ConjunctiveQuery, d: Instance) -> None:
    for atom in q.body:
        if atom.rel not in d.schema:
            raise StructuralError(f"query relation {atom.rel!r} is not in the instance schema")
        if d.schema.arity(atom.rel) != len(atom.args):
            raise StructuralError(
                f"{atom.rel} has arity {d.schema.arity(atom.rel)}, query uses {len(atom.args)}")


def _answers(q: ConjunctiveQuery, d: Instance) -> set[tuple[Value, ...]]:
    # most constrained atoms first; order does not affect the result
    atoms = sorted(q.body, key=lambda a: len(d.tuples(a.rel)))
    out = set()

    def search(i: int, env: dict[Var, Value]) -> None:
        if i == len(atoms):
            out.add(tuple(env[v] for v in q.head))
            return
        atom = atoms[i]
        for row in d.tuples(atom.rel).values():
            bound = dict(env)
            for term, val in zip(atom.args, row):
                if isinstance(term, Var):
                    if bound.setdefault(term, val) != val:
                        break
                elif term != val:
                    break
            else:
                search(i + 1, bound)

    search(0, {})
    return out


def eval_cq(q: ConjunctiveQuery, d: Instance) -> AnswerSet:
    """Standard CQ semantics; tuple ids are invisible and constants match by equality."""
    q.check_safe()
    _check_schema(q, d)
    return AnswerSet(frozenset(_answers(q, d)), len(q.head), "single instance")


def resolved_answers(q: ConjunctiveQuery, d: Instance, m: MDSet, depth_bound: int | None = None,
                     *, node_cap: int = DEFAULT_NODE_CAP, mode: str = CONJUNCTIVE,
                     mris: MRIResult | None = None) -> AnswerSet:
    """Answers true in every minimally resolved instance of ``d``.

    Tuples holding fresh constants are dropped: fresh values are minted
    independently per resolution and so are never certain. With no MRIs the
    result is flagged ``indeterminate``.
    """
    q.check_safe()
    _check_schema(q, d)
    if mris is None:
        mris = minimally_resolved(d, m, depth_bound, node_cap=node_cap, mode=mode)
    truncated = not mris.verified
    if not mris.instances:
        return AnswerSet(frozenset(), len(q.head), "certain over MRIs", 0, None, truncated, True)
    common = None
    for mri in mris.instances:
        ans = {t for t in _answers(q, mri) if not any(isinstance(v, Fresh) for v in t)}
        common = ans if common is None else common & ans
        if not common:
            break
    return AnswerSet(frozenset(common), len(q.head), "certain over MRIs", len(mris.instances),
                     mris.min_changes, truncated)


def is_resolved_answer(c: tuple, q: ConjunctiveQuery, d: Instance, m: MDSet,
                       depth_bound: int | None = None, **kwargs) -> bool | None:
    """Membership of ``c`` in the resolved answers; None when indeterminate."""
    c = tuple(c)
    if len(c) != len(q.head):
        raise ParseError(f"answer tuple has arity {len(c)}, query head has {len(q.head)}")
    ans = resolved_answers(q, d, m, depth_bound, **kwargs)
    if ans.indeterminate:
        return None
    return c in ans.tuples
