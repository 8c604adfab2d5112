"""Inference operators: monotone forward chaining over the knowledge base.

Rules only ever add edges; each round collects every candidate conclusion
from a snapshot of the current state, then inserts them, so the outcome does
not depend on evaluation order within a round.  Every new fact carries a
derivation entry naming the rule and the premise facts it used.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from . import facts
from .errors import ValidationError
from .intervals import Timestamp
from .kb import KnowledgeBase, Provenance, Relation

MAX_ROUNDS = 1000


@dataclass(frozen=True)
class Derivation:
    """One concluded edge plus the audit trail that justifies it."""

    rule: str
    relation: Relation
    source_id: int
    target_id: int
    premises: tuple[str, ...]

    def fact(self) -> str:
        return facts.format_fact(self.relation.value, [self.source_id, self.target_id])


class InferenceRule(Protocol):
    name: str

    def candidates(self, kb: KnowledgeBase) -> list[Derivation]:
        """Conclusions supported by the current state (may repeat old facts)."""


@dataclass(frozen=True)
class SessionWindow:
    """Activity span of one subject's browsing session.

    The window runs from the start of the subject's first visit to the end of
    the last one, and remembers where those visits happened.
    """

    session: object
    subject_id: int
    start: Timestamp
    end: Timestamp
    locations: frozenset[str]
    first_event_id: int
    last_event_id: int


def session_windows(kb: KnowledgeBase, visit_kind: str = "fVisit") -> list[SessionWindow]:
    """One window per subject that participates in >= 1 visit-supported event."""
    visit_events = {
        eid
        for eid in kb.events
        if any(kb.footprints[f].kind == visit_kind for f in kb.support(eid))
    }
    windows = []
    for sid in sorted(kb.subjects):
        owned = sorted(
            (
                edge.target_id
                for edge in kb.edges
                if edge.relation is Relation.PARTICIPATION
                and edge.source_id == sid
                and edge.target_id in visit_events
            )
        )
        if not owned:
            continue
        intervals = {eid: kb.events[eid].interval for eid in owned}
        first = min(owned, key=lambda e: (intervals[e].t_start, intervals[e].t_end, e))
        last = max(owned, key=lambda e: (intervals[e].t_end, intervals[e].t_start, e))
        windows.append(
            SessionWindow(
                session=kb.subjects[sid].attributes.get("session"),
                subject_id=sid,
                start=intervals[first].t_start,
                end=intervals[last].t_end,
                locations=frozenset(kb.events[eid].location for eid in owned),
                first_event_id=first,
                last_event_id=last,
            )
        )
    return windows


@dataclass(frozen=True)
class SessionAttributionRule:
    """Attribute orphan events to the subject whose session spans them.

    An event with no participating subject, falling inside a session window
    (closed on both ends) and located on a machine where that session's
    visits happened, is attributed to the session's subject.  All matching
    windows contribute: an event inside two overlapping sessions gets both
    attributions, each separately auditable.
    """

    name: str = "session-attribution"
    visit_kind: str = "fVisit"
    restrict_location: bool = True

    def candidates(self, kb: KnowledgeBase) -> list[Derivation]:
        windows = session_windows(kb, self.visit_kind)
        attributed = {
            edge.target_id for edge in kb.edges if edge.relation is Relation.PARTICIPATION
        }
        out = []
        for eid in sorted(kb.events):
            if eid in attributed:
                continue
            event = kb.events[eid]
            for w in windows:
                if not (w.start <= event.interval.t_start and event.interval.t_end <= w.end):
                    continue
                if self.restrict_location and event.location not in w.locations:
                    continue
                out.append(
                    Derivation(
                        rule=self.name,
                        relation=Relation.PARTICIPATION,
                        source_id=w.subject_id,
                        target_id=eid,
                        premises=self._premises(kb, w, eid),
                    )
                )
        return out

    def _premises(self, kb: KnowledgeBase, w: SessionWindow, eid: int) -> tuple[str, ...]:
        premises = []
        for visit in dict.fromkeys((w.first_event_id, w.last_event_id)):
            premises.append(facts.event_fact(kb.events[visit]))
            premises.append(facts.participation_fact(w.subject_id, visit))
        premises.append(facts.event_fact(kb.events[eid]))
        return tuple(premises)


BUILTIN_RULES: dict[str, type] = {"session-attribution": SessionAttributionRule}

DEFAULT_RULES: tuple[InferenceRule, ...] = (SessionAttributionRule(),)


def run_inference(
    kb: KnowledgeBase,
    rules: tuple[InferenceRule, ...] = DEFAULT_RULES,
    max_rounds: int = MAX_ROUNDS,
) -> tuple[KnowledgeBase, list[Derivation]]:
    """Apply rules to fixpoint, returning the extended kb and new derivations.

    Candidates are gathered from all rules before any insertion, so a round
    sees a consistent snapshot.  A rule set still producing new facts after
    `max_rounds` rounds is reported as non-terminating.
    """
    derived: list[Derivation] = []
    for _ in range(max_rounds):
        new_round = []
        for rule in rules:
            for cand in rule.candidates(kb):
                key = (cand.relation, cand.source_id, cand.target_id)
                if kb.has_edge(*key):
                    continue
                if any(
                    (d.relation, d.source_id, d.target_id) == key for d in new_round
                ):
                    continue
                new_round.append(cand)
        if not new_round:
            return kb, derived
        for cand in new_round:
            kb.link(cand.relation, cand.source_id, cand.target_id, Provenance.INFERRED)
            kb.provenance_log.append(
                {
                    "op": "infer",
                    "rule": cand.rule,
                    "fact": cand.fact(),
                    "premises": list(cand.premises),
                }
            )
            derived.append(cand)
    raise ValidationError(f"inference did not reach a fixpoint within {max_rounds} rounds")
