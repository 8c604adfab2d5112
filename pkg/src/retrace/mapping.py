"""Mapping operators: declarative rules turning footprints into entities.

A rule is plain data: which entities a footprint kind produces (with attribute
bindings and dedup keys) and which edges to lay down between them.  Execution
is phased (all objects, then all subjects, then all events, then edges, each
phase in footprint-id order) so produced ids are a pure function of the
footprint list, and cross-entity lookups always see the full object store.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .errors import InputError, ValidationError
from .intervals import Interval, Timestamp
from .kb import (
    AttrValue,
    CrimeSceneConfig,
    Footprint,
    KnowledgeBase,
    Provenance,
    Relation,
)


@dataclass(frozen=True)
class LookupRef:
    """Edge endpoint resolved by attribute equality against a footprint field.

    When several entities match, the smallest id wins (the earliest mapped
    entity is the canonical one).
    """

    entity: str  # "object" or "subject"
    attribute: str
    field: str

    def __post_init__(self) -> None:
        if self.entity not in ("object", "subject"):
            raise InputError(f"lookup entity must be object|subject, got {self.entity!r}")


Endpoint = Union[str, LookupRef]


@dataclass(frozen=True)
class EntityProduction:
    """One entity created (or reused via dedup) per footprint of the rule's kind.

    `attributes` maps entity attribute names to footprint field names.  For
    events, `start`/`end` name timestamp fields; a missing `end` makes the
    event instantaneous.  A non-empty `dedup` names entity attributes which,
    when equal on an existing entity, reuse it instead of creating another.
    """

    var: str
    entity: str  # object | subject | event
    attributes: tuple[tuple[str, str], ...] = ()
    start: Optional[str] = None
    end: Optional[str] = None
    dedup: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.entity not in ("object", "subject", "event"):
            raise InputError(f"production entity must be object|subject|event, got {self.entity!r}")
        if self.entity == "event" and not self.start:
            raise InputError(f"event production {self.var!r} needs a start field")
        if self.entity != "event" and (self.start or self.end):
            raise InputError(f"{self.entity} production {self.var!r} cannot have start/end")
        bound = {attr for attr, _ in self.attributes}
        if any(key not in bound for key in self.dedup):
            raise InputError(f"dedup keys of {self.var!r} must be produced attributes")


@dataclass(frozen=True)
class EdgeProduction:
    relation: Relation
    source: Endpoint
    target: Endpoint


@dataclass(frozen=True)
class MappingRule:
    kind: str
    produce: tuple[EntityProduction, ...] = ()
    edges: tuple[EdgeProduction, ...] = ()

    def __post_init__(self) -> None:
        variables = [p.var for p in self.produce]
        if len(set(variables)) != len(variables):
            raise InputError(f"rule for {self.kind!r} reuses a production variable")

    @classmethod
    def from_dict(cls, data: Mapping) -> "MappingRule":
        try:
            produce = tuple(
                EntityProduction(
                    var=p["var"],
                    entity=p["entity"],
                    attributes=tuple(
                        (a["name"], a["field"]) for a in p.get("attributes", ())
                    ),
                    start=p.get("start"),
                    end=p.get("end"),
                    dedup=tuple(p.get("dedup", ())),
                )
                for p in data.get("produce", ())
            )
            edges = tuple(
                EdgeProduction(
                    relation=Relation(e["relation"]),
                    source=_endpoint_from_dict(e["source"]),
                    target=_endpoint_from_dict(e["target"]),
                )
                for e in data.get("edges", ())
            )
            return cls(kind=data["kind"], produce=produce, edges=edges)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed mapping rule: {exc}") from None


def _endpoint_from_dict(data) -> Endpoint:
    if isinstance(data, str):
        return data
    if isinstance(data, Mapping) and "lookup" in data:
        ref = data["lookup"]
        return LookupRef(ref["entity"], ref["attribute"], ref["field"])
    raise InputError(f"malformed edge endpoint {data!r}")


DEFAULT_RULES: tuple[MappingRule, ...] = (
    MappingRule(
        kind="fWebpage",
        produce=(
            EntityProduction(
                var="page",
                entity="object",
                attributes=(
                    ("pageID", "webpageID"),
                    ("title", "pageTitle"),
                    ("url", "URL"),
                    ("hostname", "hostname"),
                ),
                dedup=("pageID",),
            ),
        ),
    ),
    MappingRule(
        kind="fVisit",
        produce=(
            EntityProduction(
                var="visitor",
                entity="subject",
                attributes=(("session", "session"),),
                dedup=("session",),
            ),
            EntityProduction(var="visit", entity="event", start="date"),
        ),
        edges=(
            EdgeProduction(Relation.USES, "visit", LookupRef("object", "pageID", "pageID")),
            EdgeProduction(Relation.PARTICIPATION, "visitor", "visit"),
        ),
    ),
    MappingRule(
        kind="fBookmark",
        produce=(EntityProduction(var="bookmarking", entity="event", start="date"),),
        edges=(
            EdgeProduction(Relation.USES, "bookmarking", LookupRef("object", "pageID", "pageID")),
        ),
    ),
    MappingRule(
        kind="fDownload",
        produce=(EntityProduction(var="download", entity="event", start="start", end="end"),),
        edges=(
            EdgeProduction(Relation.USES, "download", LookupRef("object", "pageID", "pageSourceID")),
        ),
    ),
)


def _field_value(fp: Footprint, field: str) -> AttrValue:
    if field not in fp.attributes:
        raise InputError(f"footprint {fp.id} ({fp.kind}) has no field {field!r}")
    return fp.attributes[field]


def _timestamp_field(fp: Footprint, field: str) -> Timestamp:
    value = _field_value(fp, field)
    if not isinstance(value, Timestamp):
        raise InputError(f"footprint {fp.id} field {field!r} is not a timestamp")
    return value


def location_for(fp: Footprint, scene: CrimeSceneConfig) -> str:
    """Machine id of the digital scene the footprint's source belongs to.

    A source path may be listed explicitly in a scene; otherwise a single
    configured scene covers everything.  Anything else is ambiguous and the
    run must stop rather than guess where an event took place.
    """
    source = os.path.abspath(fp.source_path) if fp.source_path else fp.source_path
    matches = []
    for ds in scene.digital_scenes:
        listed = set(ds.source_paths) | {os.path.abspath(p) for p in ds.source_paths}
        if fp.source_path in listed or source in listed:
            matches.append(ds.machine_id)
    if len(matches) == 1:
        return matches[0]
    if len(matches) > 1:
        raise ValidationError(
            f"source {fp.source_path!r} is listed in several digital scenes: {matches}"
        )
    if len(scene.digital_scenes) == 1:
        return scene.digital_scenes[0].machine_id
    raise ValidationError(
        f"cannot place footprint {fp.id} ({fp.source_path!r}) in any digital scene"
    )


def _dedup_match(store: Mapping[int, object], keys: tuple[str, ...], attrs: dict) -> Optional[int]:
    for eid in sorted(store):
        existing = store[eid].attributes
        if all(existing.get(k) == attrs.get(k) for k in keys):
            return eid
    return None


def _produce_entity(
    kb: KnowledgeBase,
    fp: Footprint,
    prod: EntityProduction,
    scene: CrimeSceneConfig,
    bindings: dict[tuple[int, str], int],
) -> None:
    if prod.entity == "event":
        start = _timestamp_field(fp, prod.start)
        end = _timestamp_field(fp, prod.end) if prod.end else start
        interval = Interval(start, end)
        location = location_for(fp, scene)
        for eid in sorted(kb.support_targets(fp.id)):
            existing = kb.events.get(eid)
            if existing and existing.interval == interval and existing.location == location:
                bindings[(fp.id, prod.var)] = eid
                return
        eid = kb.add_event(interval, location, provenance=Provenance.MAPPED)
    else:
        attrs = {attr: _field_value(fp, field) for attr, field in prod.attributes}
        store = kb.objects if prod.entity == "object" else kb.subjects
        if prod.dedup:
            existing_id = _dedup_match(store, prod.dedup, attrs)
            if existing_id is not None:
                bindings[(fp.id, prod.var)] = existing_id
                return
        if prod.entity == "object":
            eid = kb.add_object(attrs, provenance=Provenance.MAPPED)
        else:
            eid = kb.add_subject(attrs, provenance=Provenance.MAPPED)
    kb.link(Relation.SUPPORTS, fp.id, eid, Provenance.MAPPED)
    bindings[(fp.id, prod.var)] = eid


def _resolve(
    kb: KnowledgeBase,
    fp: Footprint,
    endpoint: Endpoint,
    bindings: dict[tuple[int, str], int],
) -> int:
    if isinstance(endpoint, str):
        bound = bindings.get((fp.id, endpoint))
        if bound is None:
            raise InputError(
                f"edge of rule {fp.kind!r} refers to unproduced variable {endpoint!r}"
            )
        return bound
    value = _field_value(fp, endpoint.field)
    store = kb.objects if endpoint.entity == "object" else kb.subjects
    for eid in sorted(store):
        if store[eid].attributes.get(endpoint.attribute) == value:
            return eid
    raise InputError(
        f"footprint {fp.id} ({fp.kind}): no {endpoint.entity} has "
        f"{endpoint.attribute} = {value!r}"
    )


def map_footprints(
    kb: KnowledgeBase,
    footprints: list[Footprint],
    rules: tuple[MappingRule, ...] = DEFAULT_RULES,
    scene: CrimeSceneConfig = CrimeSceneConfig(),
) -> KnowledgeBase:
    """Apply mapping rules, extending the knowledge base in place.

    Every created entity gets a support edge from its originating footprint;
    dedup reuse binds the rule variable without a new support edge.  Mapping
    the same footprints again reuses everything, so the operation is
    idempotent.
    """
    rule_map: dict[str, MappingRule] = {}
    for rule in rules:
        if rule.kind in rule_map:
            raise InputError(f"two mapping rules cover footprint kind {rule.kind!r}")
        rule_map[rule.kind] = rule
    ordered = sorted(footprints, key=lambda f: f.id)
    for fp in ordered:
        if fp.kind not in rule_map:
            raise InputError(f"no mapping rule covers footprint kind {fp.kind!r}")

    for fp in ordered:
        stored = kb.footprints.get(fp.id)
        if stored is None:
            kb.add_footprint(
                fp.kind,
                fp.attributes,
                entity_id=fp.id,
                source_path=fp.source_path,
                provenance=Provenance.EXTRACTED,
            )
        elif stored != fp:
            raise ValidationError(
                f"footprint id {fp.id} is already stored with different content"
            )

    bindings: dict[tuple[int, str], int] = {}
    for phase in ("object", "subject", "event"):
        for fp in ordered:
            for prod in rule_map[fp.kind].produce:
                if prod.entity == phase:
                    _produce_entity(kb, fp, prod, scene, bindings)
    for fp in ordered:
        for edge in rule_map[fp.kind].edges:
            source = _resolve(kb, fp, edge.source, bindings)
            target = _resolve(kb, fp, edge.target, bindings)
            kb.link(edge.relation, source, target, Provenance.MAPPED)
    return kb
