"""Extraction operators: read footprint source files into typed records.

Sources are never modified: each file is read once, hashed, re-read after
parsing, and any difference is reported as an integrity failure.  Three wire
formats are supported; the fact-statement format mirrors case fixtures
exactly, JSON Lines is the practical ingestion format, and CSV covers
spreadsheet exports of a single footprint kind.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from . import facts
from .errors import InputError, IntegrityError
from .intervals import Timestamp
from .kb import AttrValue, Footprint


class SourceFormat(Enum):
    FACTTEXT = "facttext"
    JSONL = "jsonl"
    CSV = "csv"


@dataclass(frozen=True)
class SourceDescriptor:
    """One footprint source: a path, its wire format, and relevance filters.

    `kinds`, when non-empty, is an allow-list: records of other kinds are
    skipped before schema lookup, mirroring an investigator collecting only
    the footprint families relevant to the case.
    """

    path: str
    format: SourceFormat = SourceFormat.FACTTEXT
    kind_hint: Optional[str] = None
    kinds: tuple[str, ...] = ()

    def relevant(self, kind: str) -> bool:
        return not self.kinds or kind in self.kinds


@dataclass(frozen=True)
class FieldSpec:
    name: str
    semantic: str  # int | str | timestamp
    required: bool = True

    def __post_init__(self) -> None:
        if self.semantic not in ("int", "str", "timestamp"):
            raise InputError(f"unknown semantic type {self.semantic!r} for field {self.name!r}")


Schema = tuple[FieldSpec, ...]

BUILTIN_SCHEMAS: dict[str, Schema] = {
    "fWebpage": (
        FieldSpec("id", "int"),
        FieldSpec("webpageID", "int"),
        FieldSpec("pageTitle", "str"),
        FieldSpec("URL", "str"),
        FieldSpec("hostname", "str"),
    ),
    "fVisit": (
        FieldSpec("id", "int"),
        FieldSpec("date", "timestamp"),
        FieldSpec("session", "int"),
        FieldSpec("pageID", "int"),
    ),
    "fBookmark": (
        FieldSpec("id", "int"),
        FieldSpec("date", "timestamp"),
        FieldSpec("bookmarkTitle", "str"),
        FieldSpec("pageID", "int"),
    ),
    "fDownload": (
        FieldSpec("id", "int"),
        FieldSpec("start", "timestamp"),
        FieldSpec("end", "timestamp"),
        FieldSpec("filename", "str"),
        FieldSpec("pageSourceID", "int"),
        FieldSpec("URLTarget", "str"),
    ),
}


@dataclass
class ExtractorRegistry:
    """Footprint kind to field schema; the four built-in kinds are always present."""

    schemas: dict[str, Schema] = field(default_factory=lambda: dict(BUILTIN_SCHEMAS))

    def register_kind(self, kind: str, schema: Schema) -> "ExtractorRegistry":
        if kind in self.schemas:
            raise InputError(f"footprint kind {kind!r} is already registered")
        if not schema or schema[0].name != "id" or schema[0].semantic != "int":
            raise InputError(f"schema for {kind!r} must start with an integer `id` field")
        self.schemas[kind] = tuple(schema)
        return self

    def schema_for(self, kind: str) -> Schema:
        schema = self.schemas.get(kind)
        if schema is None:
            raise InputError(f"unknown footprint kind {kind!r}")
        return schema


def _coerce(kind: str, spec: FieldSpec, raw, where: str) -> AttrValue:
    try:
        if spec.semantic == "int":
            if isinstance(raw, bool):
                raise ValueError("boolean is not an integer")
            if isinstance(raw, int):
                return raw
            return int(str(raw).strip())
        if spec.semantic == "timestamp":
            if isinstance(raw, Timestamp):
                return raw
            return Timestamp.parse(str(raw))
        if not isinstance(raw, str):
            raise ValueError(f"expected a string, got {type(raw).__name__}")
        return raw
    except (ValueError, InputError) as exc:
        raise InputError(
            f"{where}: field {spec.name!r} of {kind} is malformed ({raw!r}): {exc}"
        ) from None


def _record_to_footprint(
    kind: str, values: dict, schema: Schema, source_path: str, where: str
) -> Footprint:
    attributes: dict[str, AttrValue] = {}
    fp_id: Optional[int] = None
    for spec in schema:
        if spec.name not in values or values[spec.name] in (None, ""):
            if spec.required:
                raise InputError(f"{where}: {kind} record is missing required field {spec.name!r}")
            continue
        value = _coerce(kind, spec, values[spec.name], where)
        if spec.name == "id":
            fp_id = int(value)
        else:
            attributes[spec.name] = value
    extra = set(values) - {s.name for s in schema} - {"kind"}
    if extra:
        raise InputError(f"{where}: {kind} record has unknown fields {sorted(extra)}")
    if fp_id is None:
        raise InputError(f"{where}: {kind} record has no id")
    return Footprint(fp_id, kind, attributes, source_path)


def _parse_facttext(text: str, source: SourceDescriptor, registry: ExtractorRegistry):
    out = []
    for statement in facts.parse_facts(text):
        if not source.relevant(statement.kind):
            continue
        schema = registry.schema_for(statement.kind)
        where = f"{source.path}:{statement.line}"
        if len(statement.args) != len(schema):
            raise InputError(
                f"{where}: {statement.kind} takes {len(schema)} arguments, "
                f"got {len(statement.args)}"
            )
        values = {spec.name: arg for spec, arg in zip(schema, statement.args)}
        out.append(_record_to_footprint(statement.kind, values, schema, source.path, where))
    return out


def _parse_jsonl(text: str, source: SourceDescriptor, registry: ExtractorRegistry):
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{source.path}:{lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"{where}: invalid JSON: {exc}") from None
        if not isinstance(record, dict):
            raise InputError(f"{where}: expected a JSON object per line")
        kind = record.get("kind", source.kind_hint)
        if not kind:
            raise InputError(f"{where}: record has no `kind` and the source has no kind hint")
        if not source.relevant(kind):
            continue
        schema = registry.schema_for(kind)
        out.append(_record_to_footprint(kind, record, schema, source.path, where))
    return out


def _parse_csv(text: str, source: SourceDescriptor, registry: ExtractorRegistry):
    if not source.kind_hint:
        raise InputError(f"{source.path}: CSV sources require a kind hint")
    kind = source.kind_hint
    if not source.relevant(kind):
        return []
    schema = registry.schema_for(kind)
    out = []
    reader = csv.DictReader(io.StringIO(text))
    for row in reader:
        where = f"{source.path}:{reader.line_num}"
        if None in row:
            raise InputError(f"{where}: row has more columns than the header")
        out.append(_record_to_footprint(kind, row, schema, source.path, where))
    return out


_PARSERS = {
    SourceFormat.FACTTEXT: _parse_facttext,
    SourceFormat.JSONL: _parse_jsonl,
    SourceFormat.CSV: _parse_csv,
}


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def extract(
    source: SourceDescriptor, registry: Optional[ExtractorRegistry] = None
) -> tuple[list[Footprint], dict]:
    """Parse one source into footprints plus its integrity record.

    The source file is opened read-only and hashed before and after parsing;
    a changed hash aborts the run, because evidence must stay byte-identical.
    """
    registry = registry or ExtractorRegistry()
    try:
        with open(source.path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read source {source.path}: {exc}") from None
    digest = sha256_hex(data)
    text = data.decode("utf-8")
    footprints = _PARSERS[source.format](text, source, registry)
    with open(source.path, "rb") as fh:
        if sha256_hex(fh.read()) != digest:
            raise IntegrityError(f"source {source.path} changed while being read")
    return footprints, {"source_path": source.path, "sha256": digest}


def extract_all(
    sources: list[SourceDescriptor], registry: Optional[ExtractorRegistry] = None
) -> tuple[list[Footprint], list[dict]]:
    """Extract several sources in order; footprint ids must not collide."""
    registry = registry or ExtractorRegistry()
    footprints: list[Footprint] = []
    seen: dict[int, str] = {}
    records = []
    for source in sources:
        extracted, record = extract(source, registry)
        for fp in extracted:
            if fp.id in seen:
                raise InputError(
                    f"footprint id {fp.id} appears in both {seen[fp.id]} and {fp.source_path}"
                )
            seen[fp.id] = fp.source_path
        footprints.extend(extracted)
        records.append(record)
    return footprints, records


def footprints_to_facttext(
    footprints: list[Footprint], registry: Optional[ExtractorRegistry] = None
) -> str:
    """Serialize footprints back to fact statements (round-trip form)."""
    registry = registry or ExtractorRegistry()
    lines = []
    for fp in footprints:
        schema = registry.schema_for(fp.kind)
        args = [fp.id]
        for spec in schema[1:]:
            if spec.name in fp.attributes:
                args.append(fp.attributes[spec.name])
            elif spec.required:
                raise InputError(f"footprint {fp.id} is missing required field {spec.name!r}")
        lines.append(facts.footprint_fact(fp.kind, args))
    return "\n".join(lines) + ("\n" if lines else "")
