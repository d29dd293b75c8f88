"""Loading instances, similarity configs, MD files and schemas from disk."""

from __future__ import annotations

import csv
import io
import re
from pathlib import Path
from typing import Mapping

import yaml

from mdchase.language import MDSet, ParseError, parse_mds
from mdchase.model import Instance, Schema, StructuralError, format_value
from mdchase.similarity import KINDS, SimilarityError, SimilaritySpec, SimRegistry

TID = "_tid"


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError("file not found", source=str(path)) from None
    except UnicodeDecodeError as e:
        raise ParseError(f"not valid UTF-8 ({e.reason})", source=str(path)) from None


def load_instance(directory: str | Path, schema: Schema | None = None) -> Instance:
    """Read one ``<Relation>.csv`` per relation from ``directory``.

    A leading ``_tid`` column supplies tuple ids; otherwise ids are assigned
    after the largest supplied id, in file order, relations alphabetically.
    Relations in ``schema`` without a file are empty.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError("instance directory not found", source=str(directory))
    files = sorted(directory.glob("*.csv"))
    rels: dict[str, tuple[str, ...]] = {}
    raw: dict[str, list[tuple[int | None, list[str], int, Path]]] = {}
    for path in files:
        rel = path.stem
        reader = csv.reader(io.StringIO(_read(path), newline=""))
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("missing header row", source=str(path), line=1) from None
        header = [h.strip() for h in header]
        has_tid = bool(header) and header[0] == TID
        attrs = header[1:] if has_tid else header
        if not attrs:
            raise ParseError("relation has no attributes", source=str(path), line=1)
        for a in attrs:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*'*", a):
                raise ParseError("bad attribute name", source=str(path), line=1, token=a)
        if len(set(attrs)) != len(attrs):
            raise ParseError("duplicate attribute", source=str(path), line=1,
                             token=next(a for a in attrs if attrs.count(a) > 1))
        if schema is not None:
            if rel not in schema:
                raise ParseError(f"relation {rel!r} is not in the schema", source=str(path), line=1,
                                 token=rel)
            if tuple(attrs) != schema.attributes(rel):
                raise ParseError(f"header {attrs} does not match schema {list(schema.attributes(rel))}",
                                 source=str(path), line=1, token=",".join(header))
        rels[rel] = tuple(attrs)
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}",
                                 source=str(path), line=line, token=",".join(row))
            tid = None
            if has_tid:
                tok = row[0].strip()
                try:
                    tid = int(tok)
                except ValueError:
                    raise ParseError("tuple id must be an integer", source=str(path), line=line,
                                     token=tok) from None
                if tid < 1:
                    raise ParseError("tuple id must be positive", source=str(path), line=line,
                                     token=tok)
                row = row[1:]
            rows.append((tid, row, line, path))
        raw[rel] = rows

    if schema is not None:
        for rel, attrs in schema.relations.items():
            rels.setdefault(rel, attrs)
            raw.setdefault(rel, [])
    seen: dict[int, tuple[Path, int]] = {}
    for rel in sorted(raw):
        for tid, _, line, path in raw[rel]:
            if tid is None:
                continue
            if tid in seen:
                prev = seen[tid]
                raise ParseError(f"duplicate tuple id (also in {prev[0].name} line {prev[1]})",
                                 source=str(path), line=line, token=str(tid))
            seen[tid] = (path, line)
    next_tid = max(seen, default=0) + 1
    data: dict[str, dict[int, list[str]]] = {}
    for rel in sorted(raw):
        table = {}
        for tid, row, _, _ in raw[rel]:
            if tid is None:
                tid = next_tid
                next_tid += 1
            table[tid] = row
        data[rel] = table
    final_schema = Schema({r: rels[r] for r in sorted(rels)})
    return Instance(final_schema, data)


def write_instance_csv(d: Instance, rel: str, with_tid: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    attrs = list(d.schema.attributes(rel))
    w.writerow(([TID] if with_tid else []) + attrs)
    for tid, row in d.tuples(rel).items():
        w.writerow(([tid] if with_tid else []) + [format_value(v) for v in row])
    return buf.getvalue()


def _yaml_error(e: yaml.YAMLError, path: Path) -> ParseError:
    mark = getattr(e, "problem_mark", None)
    line = mark.line + 1 if mark is not None else None
    col = mark.column + 1 if mark is not None else None
    problem = getattr(e, "problem", None) or str(e)
    return ParseError(f"malformed config: {problem}", source=str(path), line=line, col=col)


def _load_pairs(path: Path, name: str) -> list[tuple[str, str]]:
    pairs = []
    reader = csv.reader(io.StringIO(_read(path), newline=""))
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise ParseError(f"similarity {name!r}: pair file needs two columns",
                             source=str(path), line=reader.line_num, token=",".join(row))
        pairs.append((row[0], row[1]))
    return pairs


def _line_of(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), 1):
        if re.match(rf"\s*['\"]?{re.escape(key)}['\"]?\s*:", line):
            return i
    return None


def parse_similarity_config(text: str, base: Path | None = None, source: str = "<config>") -> SimRegistry:
    """Build a registry from a YAML (or JSON) mapping of name -> entry.

    Entry keys: ``kind`` (equality, edit_distance, table), ``threshold``,
    ``transitive``, and for tables ``pairs``: either a list of two-element
    lists or the path of a two-column CSV file (relative to the config).
    """
    path = Path(source)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise _yaml_error(e, path) from None
    if doc is None:
        doc = {}
    if not isinstance(doc, Mapping):
        raise ParseError("config must be a mapping of similarity names", source=source, line=1)
    specs = []
    for name, entry in doc.items():
        line = _line_of(text, str(name))
        if not isinstance(entry, Mapping):
            raise ParseError("entry must be a mapping", source=source, line=line, token=str(name))
        unknown = set(entry) - {"kind", "threshold", "transitive", "pairs"}
        if unknown:
            raise ParseError(f"unknown key(s) {sorted(unknown)}", source=source, line=line,
                             token=sorted(unknown)[0])
        kind = entry.get("kind", "equality")
        if kind not in KINDS:
            raise ParseError(f"unknown similarity kind (expected one of {list(KINDS)})",
                             source=source, line=line, token=str(kind))
        transitive = entry.get("transitive", False)
        if not isinstance(transitive, bool):
            raise ParseError("transitive must be yes/no", source=source, line=line,
                             token=str(transitive))
        pairs = entry.get("pairs", [])
        if kind == "table":
            if isinstance(pairs, str):
                pairs = _load_pairs((base or Path(".")) / pairs, str(name))
            elif isinstance(pairs, list) and all(isinstance(p, list) and len(p) == 2 for p in pairs):
                pairs = [(str(a), str(b)) for a, b in pairs]
            else:
                raise ParseError("pairs must be a file path or a list of [x, y] pairs",
                                 source=source, line=line, token=str(name))
        spec = SimilaritySpec(str(name), kind, entry.get("threshold"),
                              frozenset(pairs) if kind == "table" else frozenset(), transitive)
        specs.append(spec)
    try:
        return SimRegistry(specs)
    except SimilarityError as e:
        bad = str(e).split("'")[1] if "'" in str(e) else None
        raise ParseError(str(e), source=source, line=_line_of(text, bad) if bad else None,
                         token=bad) from None


def load_similarity_config(path: str | Path) -> SimRegistry:
    path = Path(path)
    return parse_similarity_config(_read(path), base=path.parent, source=str(path))


def load_mds(path: str | Path, schema: Schema | None = None,
             registry: SimRegistry | None = None) -> MDSet:
    path = Path(path)
    return parse_mds(_read(path), schema=schema, registry=registry, source=str(path))


_REL_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(([^)]*)\)\s*")


def parse_schema(text: str, source: str = "<schema>") -> Schema:
    """Parse ``R(A, B, C); S(D, E)`` (``;`` or newlines between relations)."""
    rels = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        for chunk in line.split(";"):
            if not chunk.strip():
                continue
            m = _REL_RE.fullmatch(chunk)
            if not m:
                raise ParseError("expected Relation(Attr, ...)", source=source, line=lineno,
                                 token=chunk.strip())
            attrs = [a.strip() for a in m.group(2).split(",") if a.strip()]
            rels.append((m.group(1), attrs))
    try:
        return Schema(rels)
    except StructuralError as e:
        raise ParseError(str(e), source=source) from None


def load_schema(spec: str) -> Schema:
    """A schema from a file path, or inline text when no such file exists."""
    p = Path(spec)
    if p.is_file():
        return parse_schema(_read(p), source=str(p))
    return parse_schema(spec)
