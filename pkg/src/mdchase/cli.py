"""Command-line interface: ``mdchase {analyze,classify,chase,resolve,answer}``.

Exit status is 0 on success, 1 on an input error and 2 when the search was
truncated by the depth bound or node cap (partial output is still printed).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from mdchase import report
from mdchase.analysis import AnalysisError
from mdchase.chase import DEFAULT_NODE_CAP, MODES, enumerate_resolved, minimally_resolved
from mdchase.language import MDSet, ParseError, classify_query, parse_query
from mdchase.loaders import (
    load_instance,
    load_mds,
    load_schema,
    load_similarity_config,
    write_instance_csv,
)
from mdchase.model import Instance, Schema, StructuralError
from mdchase.query import resolved_answers
from mdchase.similarity import SimilarityError, SimRegistry

EXIT_OK, EXIT_INPUT, EXIT_TRUNCATED = 0, 1, 2


@dataclass
class RunConfig:
    mds: Path
    instance: Path | None = None
    sims: Path | None = None
    schema: str | None = None
    depth: int | None = None
    node_cap: int = DEFAULT_NODE_CAP
    modifiability: str = "conjunctive"
    format: str = "human"

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = cls(
            mds=Path(args.mds),
            instance=Path(args.instance) if getattr(args, "instance", None) else None,
            sims=Path(args.sims) if args.sims else None,
            schema=args.schema,
            depth=getattr(args, "depth", None),
            node_cap=getattr(args, "node_cap", DEFAULT_NODE_CAP),
            modifiability=getattr(args, "modifiability", "conjunctive"),
            format=args.format,
        )
        if cfg.depth is not None and cfg.depth < 1:
            raise ParseError("--depth must be >= 1", token=str(cfg.depth))
        if cfg.node_cap < 1:
            raise ParseError("--node-cap must be >= 1", token=str(cfg.node_cap))
        return cfg


def _load(cfg: RunConfig, need_instance: bool) -> tuple[MDSet, Instance | None]:
    registry = load_similarity_config(cfg.sims) if cfg.sims else SimRegistry()
    schema: Schema | None = load_schema(cfg.schema) if cfg.schema else None
    d = None
    if cfg.instance is not None:
        d = load_instance(cfg.instance, schema)
        schema = d.schema
    elif need_instance:
        raise ParseError("--instance is required for this command")
    m = load_mds(cfg.mds, schema=schema, registry=registry)
    return m, d


def _query_text(arg: str) -> tuple[str, str | None]:
    p = Path(arg)
    if p.is_file():
        return p.read_text(encoding="utf-8"), str(p)
    return arg, "--query"


def _emit(cfg: RunConfig, doc: dict, text: str, out) -> None:
    out.write(report.to_json(doc) if cfg.format == "structured" else text)


def cmd_analyze(args, out) -> int:
    cfg = RunConfig.from_args(args)
    m, _ = _load(cfg, need_instance=False)
    doc = report.analysis_doc(m)
    _emit(cfg, doc, report.render_analysis(doc), out)
    return EXIT_OK


def cmd_classify(args, out) -> int:
    cfg = RunConfig.from_args(args)
    m, d = _load(cfg, need_instance=False)
    text, source = _query_text(args.query)
    q = parse_query(text, schema=m.schema, source=source)
    cls = classify_query(q, m)
    doc = report.classify_doc(q, m, cls)
    _emit(cfg, doc, report.render_classify(doc), out)
    return EXIT_OK


def _status(complete: bool) -> int:
    return EXIT_OK if complete else EXIT_TRUNCATED


def cmd_chase(args, out) -> int:
    cfg = RunConfig.from_args(args)
    m, d = _load(cfg, need_instance=True)
    rs = enumerate_resolved(d, m, cfg.depth, node_cap=cfg.node_cap, mode=cfg.modifiability,
                            trace=args.trace)
    doc = report.chase_doc(rs)
    if args.trace and cfg.format == "human":
        # the tree is a structured document either way
        out.write(report.to_json(doc))
    else:
        _emit(cfg, doc, report.render_chase(doc, rs), out)
    return _status(rs.complete)


def cmd_resolve(args, out) -> int:
    cfg = RunConfig.from_args(args)
    m, d = _load(cfg, need_instance=True)
    mris = minimally_resolved(d, m, cfg.depth, node_cap=cfg.node_cap, mode=cfg.modifiability)
    doc = report.resolve_doc(mris)
    _emit(cfg, doc, report.render_resolve(doc, mris), out)
    if args.out:
        base = Path(args.out)
        for k, inst in enumerate(mris.instances, 1):
            target = base / f"mri_{k}"
            target.mkdir(parents=True, exist_ok=True)
            for rel in inst.schema.relations:
                (target / f"{rel}.csv").write_text(write_instance_csv(inst, rel), encoding="utf-8")
    return _status(mris.verified)


def cmd_answer(args, out) -> int:
    cfg = RunConfig.from_args(args)
    m, d = _load(cfg, need_instance=True)
    text, source = _query_text(args.query)
    q = parse_query(text, schema=d.schema, source=source)
    mris = minimally_resolved(d, m, cfg.depth, node_cap=cfg.node_cap, mode=cfg.modifiability)
    ans = resolved_answers(q, d, m, mris=mris)
    doc = report.answer_doc(q, ans, mris)
    _emit(cfg, doc, report.render_answer(doc), out)
    return _status(mris.verified)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdchase",
        description="Entity resolution with matching dependencies: static analysis, chase, "
                    "and resolved query answers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance: bool, search: bool):
        p.add_argument("--mds", required=True, help="MD file, one dependency per line")
        p.add_argument("--sims", help="similarity config (YAML/JSON)")
        p.add_argument("--schema", help="schema file or inline text such as 'R(A,B,C)'")
        p.add_argument("--format", choices=("human", "structured"), default="human")
        if instance:
            p.add_argument("--instance", required=search, help="directory of <Relation>.csv files")
        if search:
            p.add_argument("--depth", type=int, help="maximum chase steps (default: #MDs + 2)")
            p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP,
                           help="maximum search nodes expanded")
            p.add_argument("--modifiability", choices=MODES, default="conjunctive")

    p = sub.add_parser("analyze", help="static hard/easy verdict for an MD set")
    common(p, instance=False, search=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classify", help="classify a query as non-UJCQ, UJCQ or CHAQ")
    common(p, instance=True, search=False)
    p.add_argument("--query", required=True, help="query text or a file holding it")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("chase", help="enumerate resolved instances")
    common(p, instance=True, search=True)
    p.add_argument("--trace", action="store_true", help="emit the full chase tree")
    p.set_defaults(func=cmd_chase)

    p = sub.add_parser("resolve", help="minimally resolved instances")
    common(p, instance=True, search=True)
    p.add_argument("--out", help="write each MRI as CSV files under this directory")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("answer", help="resolved answers to a conjunctive query")
    common(p, instance=True, search=True)
    p.add_argument("--query", required=True, help="query text or a file holding it")
    p.set_defaults(func=cmd_answer)
    return parser


def run_command(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.func(args, out)
    except (ParseError, StructuralError, AnalysisError, SimilarityError) as e:
        err.write(f"error: {e}\n")
        return EXIT_INPUT
    except OSError as e:
        err.write(f"error: {e.filename or ''}: {e.strerror}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
