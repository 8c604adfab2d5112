"""Chronological ordering, event partitioning, and report rendering.

Events are split into three disjoint groups: those matching an infraction
pattern from the catalog, those tied to such an event by a retained
correlation edge, and the remaining noise.  The rendered reports are pure
functions of their inputs, so identical knowledge produces identical bytes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Union

from .correlation import CorrelationScore
from .errors import InputError, ValidationError
from .intervals import Interval
from .kb import EVENT_TO_OBJECT, SUBJECT_TO_EVENT, IllicitPattern, KnowledgeBase, Provenance, Relation
from . import facts


class PartitionLabel(Enum):
    ILLICIT = "illicit"
    CORRELATED = "correlated"
    NOISE = "noise"


class RenderFormat(Enum):
    TEXT = "text"
    JSON = "json"
    DOT = "dot"


def partition(
    kb: KnowledgeBase,
    catalog: Iterable[IllicitPattern],
    correlation_threshold: float = 0.0,
) -> dict[int, PartitionLabel]:
    """Label every event as illicit, correlated with an illicit one, or noise."""
    patterns = tuple(catalog)
    illicit = {
        eid
        for eid in kb.events
        if any(kb.event_matches(eid, p.conditions) for p in patterns)
    }
    connected = set()
    for edge in kb.edges:
        if edge.relation is not Relation.CORRELATED:
            continue
        score = edge.score if edge.score is not None else 0.0
        if score < correlation_threshold:
            continue
        if edge.source_id in illicit and edge.target_id not in illicit:
            connected.add(edge.target_id)
        if edge.target_id in illicit and edge.source_id not in illicit:
            connected.add(edge.source_id)
    labels = {}
    for eid in kb.events:
        if eid in illicit:
            labels[eid] = PartitionLabel.ILLICIT
        elif eid in connected:
            labels[eid] = PartitionLabel.CORRELATED
        else:
            labels[eid] = PartitionLabel.NOISE
    return labels


@dataclass(frozen=True)
class TimelineEntry:
    event_id: int
    interval: Interval
    location: str
    label: PartitionLabel
    subject_ids: tuple[int, ...]
    object_ids: tuple[int, ...]
    footprint_ids: tuple[int, ...]
    inferred_facts: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "t_start": self.interval.t_start.isoformat(),
            "t_end": self.interval.t_end.isoformat(),
            "location": self.location,
            "label": self.label.value,
            "subjects": list(self.subject_ids),
            "objects": list(self.object_ids),
            "footprints": list(self.footprint_ids),
            "inferred": list(self.inferred_facts),
        }


@dataclass(frozen=True)
class Timeline:
    entries: tuple[TimelineEntry, ...]
    correlations: tuple[CorrelationScore, ...]
    causes: tuple[tuple[int, int], ...] = ()


def build_timeline(
    kb: KnowledgeBase,
    scores: Iterable[CorrelationScore],
    labels: dict[int, PartitionLabel],
) -> Timeline:
    """Order and annotate every event; each appears exactly once.

    Ordering is ascending by start time, then end time, then id.
    """
    missing = set(kb.events) - set(labels)
    if missing:
        raise ValidationError(f"events without a partition label: {sorted(missing)}")
    ordered = sorted(
        kb.events.values(), key=lambda e: (e.interval.t_start, e.interval.t_end, e.id)
    )
    entries = []
    for event in ordered:
        subjects, objects, _ = kb.event_sets(event.id)
        inferred = sorted(
            facts.edge_fact(edge)
            for edge in kb.edges
            if edge.provenance is Provenance.INFERRED
            and (
                (edge.relation in SUBJECT_TO_EVENT and edge.target_id == event.id)
                or (edge.relation in EVENT_TO_OBJECT and edge.source_id == event.id)
            )
        )
        entries.append(
            TimelineEntry(
                event_id=event.id,
                interval=event.interval,
                location=event.location,
                label=labels[event.id],
                subject_ids=tuple(sorted(subjects)),
                object_ids=tuple(sorted(objects)),
                footprint_ids=tuple(sorted(kb.support(event.id))),
                inferred_facts=tuple(inferred),
            )
        )
    causes = tuple(
        sorted(
            (edge.source_id, edge.target_id)
            for edge in kb.edges
            if edge.relation is Relation.CAUSES
        )
    )
    ranked = sorted(scores, key=lambda sc: (-sc.total, sc.first_id, sc.second_id))
    return Timeline(entries=tuple(entries), correlations=tuple(ranked), causes=causes)


def _id_set(ids: tuple[int, ...]) -> str:
    return "{" + ", ".join(str(i) for i in ids) + "}"


def _render_text(timeline: Timeline, input_sha256: Optional[str]) -> str:
    lines = []
    if input_sha256:
        lines.append(f"# input kb sha256: {input_sha256}")
    lines.append(
        f"timeline: {len(timeline.entries)} events, "
        f"{len(timeline.correlations)} retained correlations"
    )
    lines.append("")
    for entry in timeline.entries:
        lines.append(
            f"{entry.interval.t_start.isoformat()} .. {entry.interval.t_end.isoformat()}"
            f"  event {entry.event_id}  [{entry.label.value}]"
            f"  location={entry.location}"
            f"  subjects={_id_set(entry.subject_ids)}"
            f"  objects={_id_set(entry.object_ids)}"
            f"  footprints={_id_set(entry.footprint_ids)}"
        )
        for fact in entry.inferred_facts:
            lines.append(f"    inferred: {fact}")
    if timeline.correlations:
        lines.append("")
        lines.append("correlations:")
        for sc in timeline.correlations:
            lines.append(
                f"  correlated({sc.first_id}, {sc.second_id})"
                f"  total={sc.total:.6f}"
                f"  (temporal={sc.temporal:.6f}, subject={sc.subject:.6f},"
                f" object={sc.object:.6f}, expert={sc.expert:.6f})"
            )
    if timeline.causes:
        lines.append("")
        lines.append("causality:")
        for source, target in timeline.causes:
            lines.append(f"  causes({source}, {target}).")
    return "\n".join(lines) + "\n"


def _render_json(timeline: Timeline, input_sha256: Optional[str]) -> str:
    doc = {
        "input_sha256": input_sha256,
        "events": [entry.to_dict() for entry in timeline.entries],
        "correlations": [sc.to_dict() for sc in timeline.correlations],
        "causes": [list(pair) for pair in timeline.causes],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _render_dot(timeline: Timeline, input_sha256: Optional[str]) -> str:
    lines = ["digraph timeline {"]
    if input_sha256:
        lines.append(f"  // input kb sha256: {input_sha256}")
    lines.append("  rankdir=LR;")
    lines.append("  node [shape=box];")
    for entry in timeline.entries:
        label = (
            f"event {entry.event_id}"
            f"\\n{entry.interval.t_start.isoformat()} .. {entry.interval.t_end.isoformat()}"
            f"\\n{entry.label.value}"
        )
        lines.append(f'  e{entry.event_id} [label="{label}"];')
    for sc in timeline.correlations:
        lines.append(
            f'  e{sc.first_id} -> e{sc.second_id} [dir=none, label="{sc.total:.6f}"];'
        )
    for source, target in timeline.causes:
        lines.append(f'  e{source} -> e{target} [label="causes"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


_RENDERERS = {
    RenderFormat.TEXT: _render_text,
    RenderFormat.JSON: _render_json,
    RenderFormat.DOT: _render_dot,
}


def render(
    timeline: Timeline,
    fmt: Union[RenderFormat, str],
    input_sha256: Optional[str] = None,
) -> str:
    """Serialize the timeline; the optional hash ties the report to its input."""
    if isinstance(fmt, str):
        try:
            fmt = RenderFormat(fmt)
        except ValueError:
            raise InputError(f"unknown render format {fmt!r}") from None
    return _RENDERERS[fmt](timeline, input_sha256)
