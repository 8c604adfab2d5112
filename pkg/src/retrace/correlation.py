"""Analysis operators: pairwise event correlation scoring and ranking.

The score of a pair decomposes into a temporal component, a shared-subject
component, a shared-object component, and an expert-rule count, combined as
a weighted sum.  Pairs are canonically oriented (earlier event first) before
scoring, which makes the whole score a symmetric function of the pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import ValidationError
from .intervals import AllenClass, before, before_decay, classify, during, equal, finishes, meets, overlaps, starts
from .kb import AttributeCondition, KnowledgeBase, Provenance, Relation


class TemporalMode(Enum):
    PRECEDENCE = "precedence"
    LITERAL_SUM = "literal-sum"


@dataclass(frozen=True)
class CorrelationConfig:
    """Scoring knobs: proximity bonus, component weights, retention policy.

    `alpha` must be >= 1 so that simultaneous starts score at least as high
    as any other temporal arrangement.  In the default precedence mode the
    temporal component is normalized into [0,1]; literal-sum mode instead
    adds up every satisfied predicate verbatim and is kept for comparison.
    """

    alpha: float = 2.0
    w_temporal: float = 1.0
    w_subject: float = 1.0
    w_object: float = 1.0
    w_expert: float = 1.0
    threshold: float = 0.0
    top_k: Optional[int] = None
    temporal_mode: TemporalMode = TemporalMode.PRECEDENCE

    def __post_init__(self) -> None:
        if self.alpha < 1.0:
            raise ValidationError(f"alpha must be >= 1, got {self.alpha}")
        for name in ("w_temporal", "w_subject", "w_object", "w_expert"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")
        if self.top_k is not None and self.top_k < 1:
            raise ValidationError(f"top_k must be positive, got {self.top_k}")


@dataclass(frozen=True)
class PairCondition:
    """Attribute condition over a pair: met by both events or by either one."""

    entity: str  # object | subject
    attribute: str
    values: tuple[str, ...]
    side: str = "both"  # both | either

    def __post_init__(self) -> None:
        if self.side not in ("both", "either"):
            raise ValidationError(f"condition side must be both|either, got {self.side!r}")

    def holds(self, kb: KnowledgeBase, e_id: int, x_id: int) -> bool:
        cond = AttributeCondition(self.entity, self.attribute, self.values)
        first = kb.event_matches(e_id, [cond])
        second = kb.event_matches(x_id, [cond])
        return (first and second) if self.side == "both" else (first or second)


@dataclass(frozen=True)
class ExpertRule:
    """Named conjunction of pair conditions; contributes 1 when all hold."""

    name: str
    conditions: tuple[PairCondition, ...]

    def evaluate(self, kb: KnowledgeBase, e_id: int, x_id: int) -> int:
        return int(all(c.holds(kb, e_id, x_id) for c in self.conditions))


@dataclass(frozen=True)
class CorrelationScore:
    first_id: int
    second_id: int
    temporal: float
    subject: float
    object: float
    expert: float
    total: float

    def to_dict(self) -> dict:
        return {
            "first_id": self.first_id,
            "second_id": self.second_id,
            "temporal": self.temporal,
            "subject": self.subject,
            "object": self.object,
            "expert": self.expert,
            "total": self.total,
        }


def canonical_pair(kb: KnowledgeBase, e_id: int, x_id: int) -> tuple[int, int]:
    """Order a pair so the earlier event comes first: by start, end, then id."""
    if e_id == x_id:
        raise ValidationError(f"a correlation pair needs two distinct events, got {e_id} twice")
    def key(eid: int):
        interval = kb.events[eid].interval
        return (interval.t_start, interval.t_end, eid)
    return (e_id, x_id) if key(e_id) <= key(x_id) else (x_id, e_id)


def correlation_T(kb: KnowledgeBase, e_id: int, x_id: int, cfg: CorrelationConfig) -> float:
    """Temporal closeness of a pair.

    Precedence mode scores the pair's single interval class (alpha for a
    shared start, 1 for touching or nested arrangements, a decaying value
    for a gap) and normalizes by alpha.  Literal-sum mode adds every
    satisfied predicate without normalizing.
    """
    e_id, x_id = canonical_pair(kb, e_id, x_id)
    e = kb.events[e_id].interval
    x = kb.events[x_id].interval
    if cfg.temporal_mode is TemporalMode.LITERAL_SUM:
        score = (
            cfg.alpha * starts(e, x)
            + cfg.alpha * equal(e, x)
            + meets(e, x)
            + overlaps(e, x)
            + during(e, x)
            + finishes(e, x)
        )
        if before(e, x):
            score += before_decay(e, x)
        return score
    klass = classify(e, x)
    if klass in (AllenClass.EQUAL, AllenClass.STARTS):
        score = cfg.alpha
    elif klass in (AllenClass.MEETS, AllenClass.OVERLAPS, AllenClass.DURING, AllenClass.FINISHES):
        score = 1.0
    elif klass is AllenClass.BEFORE:
        score = before_decay(e, x)
    else:
        score = 0.0
    return score / cfg.alpha


def _set_overlap(a: frozenset, b: frozenset) -> float:
    denominator = max(len(a), len(b))
    if denominator == 0:
        return 0.0
    return len(a & b) / denominator


def correlation_S(kb: KnowledgeBase, e_id: int, x_id: int) -> float:
    """Shared-subject ratio: |common| / size of the larger subject set."""
    s_e, _, _ = kb.event_sets(e_id)
    s_x, _, _ = kb.event_sets(x_id)
    return _set_overlap(s_e, s_x)


def correlation_O(kb: KnowledgeBase, e_id: int, x_id: int) -> float:
    """Shared-object ratio: |common| / size of the larger object set."""
    _, o_e, _ = kb.event_sets(e_id)
    _, o_x, _ = kb.event_sets(x_id)
    return _set_overlap(o_e, o_x)


def correlation_KBR(
    kb: KnowledgeBase, e_id: int, x_id: int, rules: tuple[ExpertRule, ...]
) -> int:
    """Count of satisfied expert rules; unbounded above by design."""
    e_id, x_id = canonical_pair(kb, e_id, x_id)
    return sum(rule.evaluate(kb, e_id, x_id) for rule in rules)


def correlation(
    kb: KnowledgeBase,
    e_id: int,
    x_id: int,
    cfg: CorrelationConfig = CorrelationConfig(),
    rules: tuple[ExpertRule, ...] = (),
) -> CorrelationScore:
    first, second = canonical_pair(kb, e_id, x_id)
    t = correlation_T(kb, first, second, cfg)
    s = correlation_S(kb, first, second)
    o = correlation_O(kb, first, second)
    kbr = float(correlation_KBR(kb, first, second, rules))
    total = cfg.w_temporal * t + cfg.w_subject * s + cfg.w_object * o + cfg.w_expert * kbr
    return CorrelationScore(first, second, t, s, o, kbr, total)


def correlate_all(
    kb: KnowledgeBase,
    cfg: CorrelationConfig = CorrelationConfig(),
    rules: tuple[ExpertRule, ...] = (),
) -> list[CorrelationScore]:
    """Score every unordered event pair; retain, rank, and record the best.

    Pairs at or above the threshold survive, the list is cut to `top_k` when
    set, and each retained pair is stored as a correlation edge annotated
    with its total score.
    """
    ids = sorted(kb.events)
    scores = [
        correlation(kb, e_id, x_id, cfg, rules)
        for i, e_id in enumerate(ids)
        for x_id in ids[i + 1 :]
    ]
    scores.sort(key=lambda sc: (-sc.total, sc.first_id, sc.second_id))
    retained = [sc for sc in scores if sc.total >= cfg.threshold]
    if cfg.top_k is not None:
        retained = retained[: cfg.top_k]
    for sc in retained:
        kb.link(
            Relation.CORRELATED,
            sc.first_id,
            sc.second_id,
            Provenance.ASSERTED,
            score=sc.total,
        )
    return retained
