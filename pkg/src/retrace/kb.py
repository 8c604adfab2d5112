"""Typed knowledge base for reconstructed incidents.

Stores subjects, objects, events, and footprints in one global integer id
space, links them through typed relation edges, and keeps an append-only
provenance log plus source-integrity records.  Nothing is ever mutated or
deleted once stored: corrections are modelled as new assertions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

from .errors import ValidationError
from .intervals import Interval, Timestamp, before, during, equal, finishes, meets, overlaps, starts

AttrValue = Union[str, int, Timestamp]
Attributes = dict[str, AttrValue]


class Relation(Enum):
    """Typed edge vocabulary; values double as serialization predicates."""

    PARTICIPATION = "participation"  # subject was involved in event
    REPERCUSSION = "repercussion"    # subject was affected by event
    CREATES = "creates"              # event created object
    REMOVES = "removes"              # event deleted object
    MODIFIES = "modifies"            # event altered object
    USES = "usage"                   # event used object
    COMPOSES = "composes"            # event is a sub-event of event
    CAUSES = "causes"                # event enabled event
    SUPPORTS = "support"             # footprint evidences entity
    CORRELATED = "correlated"        # events scored as related


SUBJECT_TO_EVENT = frozenset({Relation.PARTICIPATION, Relation.REPERCUSSION})
EVENT_TO_OBJECT = frozenset(
    {Relation.CREATES, Relation.REMOVES, Relation.MODIFIES, Relation.USES}
)
EVENT_TO_EVENT = frozenset({Relation.COMPOSES, Relation.CAUSES, Relation.CORRELATED})


class Provenance(Enum):
    EXTRACTED = "extracted"
    MAPPED = "mapped"
    INFERRED = "inferred"
    ASSERTED = "asserted"


@dataclass(frozen=True)
class SubjectEntity:
    """Human actor or process, described by attributes such as a session id."""

    id: int
    attributes: Attributes = field(default_factory=dict)


@dataclass(frozen=True)
class ObjectEntity:
    """Thing an event acts on (webpage, file, ...); carries >= 1 attribute."""

    id: int
    attributes: Attributes = field(default_factory=dict)


@dataclass(frozen=True)
class EventEntity:
    """Single action with a life-cycle interval and a machine location."""

    id: int
    interval: Interval
    location: str = ""


@dataclass(frozen=True)
class Footprint:
    """Raw-evidence record of a given kind; the only ground truth in a case."""

    id: int
    kind: str
    attributes: Attributes = field(default_factory=dict)
    source_path: str = ""


@dataclass(frozen=True)
class RelationEdge:
    relation: Relation
    source_id: int
    target_id: int
    provenance: Provenance
    score: Optional[float] = None  # set only on CORRELATED edges


@dataclass(frozen=True)
class AttributeCondition:
    """Match when some linked entity of the given type carries the attribute value.

    Values are compared textually so config files need not care about the
    stored type (e.g. an integer session number).
    """

    entity: str  # "object" or "subject"
    attribute: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.entity not in ("object", "subject"):
            raise ValidationError(f"condition entity must be object|subject, got {self.entity!r}")

    def accepts(self, value: AttrValue) -> bool:
        return any(str(value) == str(v) for v in self.values)


@dataclass(frozen=True)
class IllicitPattern:
    """Named infraction matched against an event's linked subjects/objects."""

    infraction_name: str
    conditions: tuple[AttributeCondition, ...]


@dataclass(frozen=True)
class DigitalScene:
    machine_id: str
    source_paths: tuple[str, ...] = ()


@dataclass(frozen=True)
class CrimeSceneConfig:
    """Physical and digital perimeter of a case plus the infraction catalog."""

    physical_scenes: tuple[str, ...] = ()
    digital_scenes: tuple[DigitalScene, ...] = ()
    illicit_catalog: tuple[IllicitPattern, ...] = ()

    def __post_init__(self) -> None:
        machines = [s.machine_id for s in self.digital_scenes]
        if len(set(machines)) != len(machines):
            raise ValidationError(f"duplicate machine_id in digital scenes: {machines}")
        names = [p.infraction_name for p in self.illicit_catalog]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate infraction name in catalog: {names}")


class KnowledgeBase:
    """Entity stores, relation edges, integrity records, and provenance log."""

    def __init__(self) -> None:
        self.subjects: dict[int, SubjectEntity] = {}
        self.objects: dict[int, ObjectEntity] = {}
        self.events: dict[int, EventEntity] = {}
        self.footprints: dict[int, Footprint] = {}
        self.edges: list[RelationEdge] = []
        self.integrity_records: list[dict] = []
        self.provenance_log: list[dict] = []
        self._edge_keys: dict[tuple[Relation, int, int], RelationEdge] = {}

    # -- id space ---------------------------------------------------------

    def all_ids(self) -> set[int]:
        return (
            set(self.subjects) | set(self.objects) | set(self.events) | set(self.footprints)
        )

    def next_id(self) -> int:
        ids = self.all_ids()
        return max(ids) + 1 if ids else 1

    def _claim_id(self, entity_id: Optional[int]) -> int:
        if entity_id is None:
            return self.next_id()
        if entity_id in self.all_ids():
            raise ValidationError(f"id {entity_id} is already in use")
        return entity_id

    # -- entity insertion (append-only) -----------------------------------

    def add_subject(
        self,
        attributes: Optional[Mapping[str, AttrValue]] = None,
        *,
        entity_id: Optional[int] = None,
        provenance: Provenance = Provenance.MAPPED,
    ) -> int:
        eid = self._claim_id(entity_id)
        self.subjects[eid] = SubjectEntity(eid, dict(attributes or {}))
        self._log("add_subject", id=eid, provenance=provenance.value)
        return eid

    def add_object(
        self,
        attributes: Mapping[str, AttrValue],
        *,
        entity_id: Optional[int] = None,
        provenance: Provenance = Provenance.MAPPED,
    ) -> int:
        if not attributes:
            raise ValidationError("an object must carry at least one attribute")
        eid = self._claim_id(entity_id)
        self.objects[eid] = ObjectEntity(eid, dict(attributes))
        self._log("add_object", id=eid, provenance=provenance.value)
        return eid

    def add_event(
        self,
        interval: Interval,
        location: str = "",
        *,
        entity_id: Optional[int] = None,
        provenance: Provenance = Provenance.MAPPED,
    ) -> int:
        eid = self._claim_id(entity_id)
        self.events[eid] = EventEntity(eid, interval, location)
        self._log("add_event", id=eid, provenance=provenance.value)
        return eid

    def add_footprint(
        self,
        kind: str,
        attributes: Optional[Mapping[str, AttrValue]] = None,
        *,
        entity_id: Optional[int] = None,
        source_path: str = "",
        provenance: Provenance = Provenance.EXTRACTED,
    ) -> int:
        if not kind:
            raise ValidationError("footprint kind must be non-empty")
        eid = self._claim_id(entity_id)
        self.footprints[eid] = Footprint(eid, kind, dict(attributes or {}), source_path)
        self._log("add_footprint", id=eid, kind=kind, provenance=provenance.value)
        return eid

    # -- edges -------------------------------------------------------------

    def link(
        self,
        relation: Relation,
        source_id: int,
        target_id: int,
        provenance: Provenance = Provenance.ASSERTED,
        score: Optional[float] = None,
    ) -> RelationEdge:
        """Store a typed edge after signature and constraint checks.

        Re-linking an identical (relation, source, target) triple is a no-op
        returning the stored edge, which keeps mapping and inference
        idempotent without ever duplicating an edge.
        """
        self._check_signature(relation, source_id, target_id)
        key = (relation, source_id, target_id)
        existing = self._edge_keys.get(key)
        if existing is not None:
            return existing
        if relation is Relation.COMPOSES and not self.validate_composes(source_id, target_id):
            raise ValidationError(
                f"composition constraint violated for events {source_id} -> {target_id}"
            )
        if relation is Relation.CAUSES and not self.validate_causes(source_id, target_id):
            raise ValidationError(
                f"causality constraint violated for events {source_id} -> {target_id}"
            )
        edge = RelationEdge(relation, source_id, target_id, provenance, score)
        self.edges.append(edge)
        self._edge_keys[key] = edge
        self._log(
            "link",
            relation=relation.value,
            source=source_id,
            target=target_id,
            provenance=provenance.value,
        )
        return edge

    def _check_signature(self, relation: Relation, source_id: int, target_id: int) -> None:
        if relation in SUBJECT_TO_EVENT:
            ok = source_id in self.subjects and target_id in self.events
            expect = "subject -> event"
        elif relation in EVENT_TO_OBJECT:
            ok = source_id in self.events and target_id in self.objects
            expect = "event -> object"
        elif relation in EVENT_TO_EVENT:
            ok = source_id in self.events and target_id in self.events
            expect = "event -> event"
        elif relation is Relation.SUPPORTS:
            ok = source_id in self.footprints and (
                target_id in self.subjects or target_id in self.objects or target_id in self.events
            )
            expect = "footprint -> entity"
        else:  # pragma: no cover - enum is closed
            raise ValidationError(f"unknown relation {relation}")
        if not ok:
            raise ValidationError(
                f"{relation.value}({source_id}, {target_id}) does not match the "
                f"required signature {expect} (or an endpoint does not exist)"
            )

    # -- queries -----------------------------------------------------------

    def event_sets(self, event_id: int) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
        """Subjects, objects, and events linked to the given event."""
        self._require_event(event_id)
        subjects, objects, events = set(), set(), set()
        for edge in self.edges:
            if edge.relation in SUBJECT_TO_EVENT and edge.target_id == event_id:
                subjects.add(edge.source_id)
            elif edge.relation in EVENT_TO_OBJECT and edge.source_id == event_id:
                objects.add(edge.target_id)
            elif edge.relation in EVENT_TO_EVENT:
                if edge.source_id == event_id:
                    events.add(edge.target_id)
                elif edge.target_id == event_id:
                    events.add(edge.source_id)
        return frozenset(subjects), frozenset(objects), frozenset(events)

    def support(self, entity_id: int) -> set[int]:
        """Footprints evidencing the given subject, object, or event."""
        if entity_id in self.footprints:
            raise ValidationError(f"id {entity_id} is a footprint; footprints are not supported entities")
        if not (
            entity_id in self.subjects or entity_id in self.objects or entity_id in self.events
        ):
            raise ValidationError(f"unknown entity id {entity_id}")
        return {
            e.source_id
            for e in self.edges
            if e.relation is Relation.SUPPORTS and e.target_id == entity_id
        }

    def has_edge(self, relation: Relation, source_id: int, target_id: int) -> bool:
        return (relation, source_id, target_id) in self._edge_keys

    def support_targets(self, footprint_id: int) -> set[int]:
        """Entities evidenced by the given footprint (reverse of `support`)."""
        if footprint_id not in self.footprints:
            raise ValidationError(f"unknown footprint id {footprint_id}")
        return {
            e.target_id
            for e in self.edges
            if e.relation is Relation.SUPPORTS and e.source_id == footprint_id
        }

    def validate_composes(self, x_id: int, e_id: int) -> int:
        """1 iff x can be a sub-event of e: temporal containment plus
        subject-set and object-set inclusion."""
        x = self._require_event(x_id)
        e = self._require_event(e_id)
        temporal = (
            equal(x.interval, e.interval)
            or during(x.interval, e.interval)
            or starts(x.interval, e.interval)
            or finishes(x.interval, e.interval)
        )
        if not temporal:
            return 0
        sx, ox, _ = self.event_sets(x_id)
        se, oe, _ = self.event_sets(e_id)
        return int(sx <= se and ox <= oe)

    def validate_causes(self, x_id: int, e_id: int) -> int:
        """1 iff x can be a cause of e: x precedes (or at least reaches into)
        e and the two events share a subject or an object."""
        x = self._require_event(x_id)
        e = self._require_event(e_id)
        temporal = (
            before(x.interval, e.interval)
            or meets(x.interval, e.interval)
            or overlaps(x.interval, e.interval)
            or starts(x.interval, e.interval)
        )
        if not temporal:
            return 0
        sx, ox, _ = self.event_sets(x_id)
        se, oe, _ = self.event_sets(e_id)
        return int(bool(sx & se) or bool(ox & oe))

    def event_matches(self, event_id: int, conditions: Iterable[AttributeCondition]) -> bool:
        """True when every condition is satisfied by some linked entity."""
        subjects, objects, _ = self.event_sets(event_id)
        for cond in conditions:
            if cond.entity == "subject":
                pool = (self.subjects[i] for i in subjects)
            else:
                pool = (self.objects[i] for i in objects)
            if not any(
                cond.attribute in ent.attributes and cond.accepts(ent.attributes[cond.attribute])
                for ent in pool
            ):
                return False
        return True

    # -- bookkeeping ---------------------------------------------------------

    def record_integrity(self, source_path: str, sha256: str) -> None:
        record = {"source_path": source_path, "sha256": sha256}
        if record not in self.integrity_records:
            self.integrity_records.append(record)
            self._log("record_integrity", source_path=source_path, sha256=sha256)

    def _log(self, op: str, **detail) -> None:
        entry = {"op": op}
        entry.update(detail)
        self.provenance_log.append(entry)

    def _require_event(self, event_id: int) -> EventEntity:
        ev = self.events.get(event_id)
        if ev is None:
            raise ValidationError(f"unknown event id {event_id}")
        return ev

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        """Plain-data snapshot with deterministic ordering everywhere."""
        return {
            "subjects": {
                str(i): {"id": i, "attributes": attributes_to_json(s.attributes)}
                for i, s in sorted(self.subjects.items())
            },
            "objects": {
                str(i): {"id": i, "attributes": attributes_to_json(o.attributes)}
                for i, o in sorted(self.objects.items())
            },
            "events": {
                str(i): {
                    "id": i,
                    "t_start": ev.interval.t_start.isoformat(),
                    "t_end": ev.interval.t_end.isoformat(),
                    "location": ev.location,
                }
                for i, ev in sorted(self.events.items())
            },
            "footprints": {
                str(i): {
                    "id": i,
                    "kind": fp.kind,
                    "attributes": attributes_to_json(fp.attributes),
                    "source_path": fp.source_path,
                }
                for i, fp in sorted(self.footprints.items())
            },
            "edges": [
                {
                    "relation": e.relation.value,
                    "source": e.source_id,
                    "target": e.target_id,
                    "provenance": e.provenance.value,
                    "score": e.score,
                }
                for e in sorted(
                    self.edges, key=lambda e: (e.relation.value, e.source_id, e.target_id)
                )
            ],
            "integrity_records": list(self.integrity_records),
            "provenance_log": list(self.provenance_log),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KnowledgeBase":
        kb = cls()
        for rec in data.get("subjects", {}).values():
            kb.subjects[rec["id"]] = SubjectEntity(rec["id"], attributes_from_json(rec["attributes"]))
        for rec in data.get("objects", {}).values():
            kb.objects[rec["id"]] = ObjectEntity(rec["id"], attributes_from_json(rec["attributes"]))
        for rec in data.get("events", {}).values():
            kb.events[rec["id"]] = EventEntity(
                rec["id"], Interval.parse(rec["t_start"], rec["t_end"]), rec["location"]
            )
        for rec in data.get("footprints", {}).values():
            kb.footprints[rec["id"]] = Footprint(
                rec["id"], rec["kind"], attributes_from_json(rec["attributes"]), rec["source_path"]
            )
        for rec in data.get("edges", []):
            edge = RelationEdge(
                Relation(rec["relation"]),
                rec["source"],
                rec["target"],
                Provenance(rec["provenance"]),
                rec.get("score"),
            )
            kb.edges.append(edge)
            kb._edge_keys[(edge.relation, edge.source_id, edge.target_id)] = edge
        kb.integrity_records = list(data.get("integrity_records", []))
        kb.provenance_log = list(data.get("provenance_log", []))
        return kb


def attributes_to_json(attributes: Attributes) -> dict:
    out = {}
    for name in sorted(attributes):
        value = attributes[name]
        if isinstance(value, Timestamp):
            out[name] = {"timestamp": value.isoformat()}
        else:
            out[name] = value
    return out


def attributes_from_json(data: Mapping) -> Attributes:
    out: Attributes = {}
    for name, value in data.items():
        if isinstance(value, dict) and set(value) == {"timestamp"}:
            out[name] = Timestamp.parse(value["timestamp"])
        else:
            out[name] = value
    return out
