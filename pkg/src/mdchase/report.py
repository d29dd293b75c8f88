"""Structured and plain-text reports for each CLI command.

Every builder returns a JSON-serializable document; ``render_*`` turns the
same document into text, so both forms always carry the same content.
"""

from __future__ import annotations

import csv
import io
import json

from mdchase.analysis import (
    build_mdg,
    check_shape,
    components,
    equivalent_sets,
    hardness_verdict,
    structure_report,
)
from mdchase.chase import MRIResult, ResolvedSet
from mdchase.language import (
    ConjunctiveQuery,
    MDSet,
    free_occurrences,
    print_md,
    unchangeable_join_violations,
    QueryClass,
)
from mdchase.loaders import write_instance_csv
from mdchase.model import format_value
from mdchase.query import AnswerSet


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def analysis_doc(m: MDSet, all_sims_transitive: bool | None = None) -> dict:
    m = check_shape(m)
    g = build_mdg(m)
    rep = structure_report(m)
    verdict = hardness_verdict(m, all_sims_transitive)
    ess = None
    if rep.linear_pair:
        ess = [e.to_dict() for e in equivalent_sets(rep.linear_pair, m)]
    return {
        "mds": [print_md(md) for md in m],
        "graph": {
            "vertices": list(g.vertices),
            "edges": [
                {"from": a, "to": b, "overlap": [str(x) for x in sorted(g.overlaps[(a, b)])]}
                for a, b in sorted(g.edges)
            ],
        },
        "structure": rep.to_dict(),
        "components": {
            md.name: {side: components(md, side).to_list() for side in ("L", "R")} for md in m
        },
        "equivalent_sets": ess,
        "conditions": verdict.theorem1.conditions if verdict.theorem1 else None,
        "theorem3_witnesses": (
            [w.to_dict() for w in verdict.theorem3] if verdict.theorem3 is not None else None
        ),
        "verdict": {"outcome": verdict.outcome, "by": verdict.by, "witness": verdict.witness},
        "trace": verdict.trace,
    }


def render_analysis(doc: dict) -> str:
    out = ["MDs:"]
    out += [f"  {line}" for line in doc["mds"]]
    out.append("graph:")
    if doc["graph"]["edges"]:
        out += [f"  {e['from']} -> {e['to']}  overlap {{{', '.join(e['overlap'])}}}"
                for e in doc["graph"]["edges"]]
    else:
        out.append("  (no edges)")
    s = doc["structure"]
    out.append("structure:")
    out += [f"  {k}: {s[k]}" for k in ("acyclic", "interacting", "pair_preserving", "linear_pair")]
    out.append("components:")
    for name, sides in doc["components"].items():
        for side in ("L", "R"):
            classes = " ".join("{" + ", ".join(c) + "}" for c in sides[side])
            out.append(f"  {name} {side}: {classes}")
    if doc["equivalent_sets"] is not None:
        out.append("equivalent sets:")
        for e in doc["equivalent_sets"]:
            out.append(f"  {e['relation']}-ES {{{', '.join(e['attrs'])}}} "
                       f"{'bound' if e['bound'] else 'unbound'}")
    if doc["conditions"] is not None:
        out.append("conditions:")
        out.append("       (i)    (ii)   (iii)")
        for k, v in doc["conditions"].items():
            out.append(f"  ({k})  " + "  ".join(f"{str(v[c]):<5}" for c in ("i", "ii", "iii")))
    if doc["theorem3_witnesses"] is not None:
        out.append("Theorem 3 witnesses:")
        out += [f"  m1={w['m1']} m2={w['m2']} C={w['C']} B={w['B']}"
                for w in doc["theorem3_witnesses"]] or ["  (none)"]
    out.append("trace:")
    out += [f"  {line}" for line in doc["trace"][:-1]]
    out.append(doc["trace"][-1])
    return "\n".join(out) + "\n"


def classify_doc(q: ConjunctiveQuery, m: MDSet, cls: QueryClass) -> dict:
    return {
        "query": str(q),
        "class": cls.value,
        "label": cls.describe(),
        "changeable_join_violations": [
            {"variable": v.name, "attr": str(a)} for v, a in unchangeable_join_violations(q, m)
        ],
        "free_occurrences": [str(a) for a in free_occurrences(q, m)],
    }


def render_classify(doc: dict) -> str:
    out = [f"query: {doc['query']}"]
    for v in doc["changeable_join_violations"]:
        out.append(f"existential join on {v['variable']} in changeable slot {v['attr']}")
    for a in doc["free_occurrences"]:
        out.append(f"free occurrence: {a}")
    out.append(doc["label"])
    return "\n".join(out) + "\n"


def _search_flags(rs: ResolvedSet) -> dict:
    return {
        "depth_bound": rs.depth_bound,
        "exhausted": rs.exhausted,
        "truncated": rs.truncated,
        "capped": rs.capped,
        "nodes_expanded": rs.nodes_expanded,
        "dead_ends": rs.dead_ends,
    }


def chase_doc(rs: ResolvedSet) -> dict:
    doc = {
        "search": _search_flags(rs),
        "resolved": [
            {"changes": rs.changes[i], "instance": i.to_dict()} for i in rs.instances
        ],
    }
    if rs.trace is not None:
        doc["tree"] = rs.trace
    return doc


def _instance_text(inst) -> list[str]:
    out = []
    for rel in sorted(inst.schema.relations):
        out.append(f"-- {rel}")
        out.extend(write_instance_csv(inst, rel).rstrip("\n").split("\n"))
    return out


def render_chase(doc: dict, rs: ResolvedSet) -> str:
    s = doc["search"]
    out = [f"resolved instances: {len(rs.instances)}"]
    for k, inst in enumerate(rs.instances, 1):
        out.append(f"## resolved {k} (changes: {rs.changes[inst]})")
        out.extend(_instance_text(inst))
    if "tree" in doc:
        tree = doc["tree"]
        out.append(f"## tree: {len(tree['nodes'])} nodes, {len(tree['edges'])} edges")
        for e in tree["edges"]:
            asg = "; ".join(f"{{{','.join(a['class'])}}} <- {a['value']}" for a in e["assignment"])
            out.append(f"  n{e['from']} -> n{e['to']}  {asg}  valid={e['valid']}")
    out.append(_summary_line(s))
    return "\n".join(out) + "\n"


def _summary_line(s: dict) -> str:
    return (f"search: depth_bound={s['depth_bound']} exhausted={s['exhausted']} "
            f"truncated={s['truncated']} capped={s['capped']} nodes={s['nodes_expanded']} "
            f"dead_ends={s['dead_ends']}")


def resolve_doc(mris: MRIResult) -> dict:
    return {
        "mri_count": len(mris.instances),
        "min_changes": mris.min_changes,
        "verified_minimal": mris.verified,
        "search": _search_flags(mris.resolved),
        "mris": [
            {rel: write_instance_csv(i, rel) for rel in sorted(i.schema.relations)}
            for i in mris.instances
        ],
    }


def render_resolve(doc: dict, mris: MRIResult) -> str:
    out = []
    for k, inst in enumerate(mris.instances, 1):
        out.append(f"## MRI {k}")
        out.extend(_instance_text(inst))
    out.append(f"MRIs: {doc['mri_count']}  change count: {doc['min_changes']}  "
               f"verified minimal: {doc['verified_minimal']}")
    out.append(_summary_line(doc["search"]))
    return "\n".join(out) + "\n"


def answer_doc(q: ConjunctiveQuery, ans: AnswerSet, mris: MRIResult) -> dict:
    return {
        "query": str(q),
        "head": [v.name for v in q.head],
        "answers": [[format_value(v) for v in t] for t in ans.sorted()],
        "provenance": {
            "mri_count": ans.mri_count,
            "min_changes": ans.min_changes,
            "truncated": ans.truncated,
            "indeterminate": ans.indeterminate,
        },
        "search": _search_flags(mris.resolved),
    }


def render_answer(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(doc["head"])
    w.writerows(doc["answers"])
    p = doc["provenance"]
    tail = (f"# MRIs: {p['mri_count']}  change count: {p['min_changes']}  "
            f"truncated: {p['truncated']}  indeterminate: {p['indeterminate']}")
    return buf.getvalue() + tail + "\n"
