"""Shared helpers and independent oracles for the test suite.

The `o_*` functions re-derive expected results from raw integers and plain
set algebra, without calling into the package, so every important value is
checked over two independently written routes.
"""
from __future__ import annotations

import random
from typing import Mapping

from retrace import Interval, KnowledgeBase, Provenance, Relation, Timestamp

Bounds = tuple[int, int]


def ts(seconds: int) -> Timestamp:
    return Timestamp(seconds)


def iv(start: int, end: int) -> Interval:
    return Interval(ts(start), ts(end))


def grid_intervals(lo: int = 0, hi: int = 6) -> list[Bounds]:
    """All integer interval bounds with lo <= a <= b <= hi."""
    return [(a, b) for a in range(lo, hi + 1) for b in range(a, hi + 1)]


# -- relation predicates over raw bounds -------------------------------------

def o_before(x: Bounds, y: Bounds) -> int:
    return int(x[1] < y[0])


def o_equal(x: Bounds, y: Bounds) -> int:
    return int(x[0] == y[0] and x[1] == y[1])


def o_meets(x: Bounds, y: Bounds) -> int:
    return int(x[1] == y[0])


def o_overlaps(x: Bounds, y: Bounds) -> int:
    return int(x[0] < y[0] and x[1] > y[0])


def o_during(x: Bounds, y: Bounds) -> int:
    return int(x[0] > y[0] and x[1] < y[1])


def o_starts(x: Bounds, y: Bounds) -> int:
    return int(x[0] == y[0])


def o_finishes(x: Bounds, y: Bounds) -> int:
    return int(x[1] == y[1])


ORACLE_PREDICATES = {
    "before": o_before,
    "equal": o_equal,
    "meets": o_meets,
    "overlaps": o_overlaps,
    "during": o_during,
    "starts": o_starts,
    "finishes": o_finishes,
}


def o_classify(x: Bounds, y: Bounds) -> str:
    if o_equal(x, y):
        return "equal"
    if o_starts(x, y):
        return "starts"
    if o_finishes(x, y):
        return "finishes"
    if o_meets(x, y):
        return "meets"
    if o_overlaps(x, y):
        return "overlaps"
    if o_during(x, y):
        return "during"
    if o_before(x, y):
        return "before"
    if o_before(y, x):
        return "after"
    return "incomparable"


def o_decay(gap: int) -> float:
    return 1.0 / (1 + gap)


def o_pair_key(bounds: Bounds, eid: int) -> tuple[int, int, int]:
    return (bounds[0], bounds[1], eid)


def o_temporal(e: Bounds, x: Bounds, alpha: float) -> float:
    """Normalized temporal score for a pair already in canonical order."""
    klass = o_classify(e, x)
    if klass in ("equal", "starts"):
        return alpha / alpha
    if klass in ("meets", "overlaps", "during", "finishes"):
        return 1.0 / alpha
    if klass == "before":
        return o_decay(x[0] - e[1]) / alpha
    return 0.0


def o_ratio(a: set, b: set) -> float:
    larger = max(len(a), len(b))
    return len(a & b) / larger if larger else 0.0


def o_composes(x: Bounds, e: Bounds, sx: set, se: set, ox: set, oe: set) -> int:
    temporal = o_equal(x, e) or o_during(x, e) or o_starts(x, e) or o_finishes(x, e)
    return int(bool(temporal) and sx <= se and ox <= oe)


def o_causes(x: Bounds, e: Bounds, sx: set, se: set, ox: set, oe: set) -> int:
    temporal = o_before(x, e) or o_meets(x, e) or o_overlaps(x, e) or o_starts(x, e)
    return int(bool(temporal) and bool((sx & se) or (ox & oe)))


def o_rank(
    specs: Mapping[str, dict],
    event_ids: Mapping[str, int],
    alpha: float,
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> list[tuple[int, int, float]]:
    """Brute-force totals for every unordered pair, ranked like the package.

    Expert rules are out of scope here; weights cover (temporal, subject,
    object).  Rows come back as (first_id, second_id, total) sorted by
    descending total with ties broken by the id pair.
    """
    keys = sorted(specs)
    rows = []
    for i, a in enumerate(keys):
        for b in keys[i + 1 :]:
            first, second = a, b
            if o_pair_key(specs[b]["bounds"], event_ids[b]) < o_pair_key(
                specs[a]["bounds"], event_ids[a]
            ):
                first, second = b, a
            t = o_temporal(specs[first]["bounds"], specs[second]["bounds"], alpha)
            s = o_ratio(specs[first].get("subjects", set()), specs[second].get("subjects", set()))
            o = o_ratio(specs[first].get("objects", set()), specs[second].get("objects", set()))
            total = weights[0] * t + weights[1] * s + weights[2] * o
            rows.append((event_ids[first], event_ids[second], total))
    rows.sort(key=lambda row: (-row[2], row[0], row[1]))
    return rows


# -- synthetic knowledge bases ------------------------------------------------

def build_event_kb(specs: Mapping[str, dict]) -> tuple[KnowledgeBase, dict[str, int]]:
    """Build a kb from {key: {"bounds", "subjects", "objects", "location"}}.

    Subject and object labels are shared across events, so overlap ratios on
    label sets match ratios on the stored id sets exactly.  Returns the kb
    and the event-key to id map.
    """
    kb = KnowledgeBase()
    subject_ids: dict[str, int] = {}
    object_ids: dict[str, int] = {}
    for key in sorted(specs):
        for label in sorted(specs[key].get("subjects", ())):
            if label not in subject_ids:
                subject_ids[label] = kb.add_subject({"session": label})
        for label in sorted(specs[key].get("objects", ())):
            if label not in object_ids:
                object_ids[label] = kb.add_object({"url": label})
    event_ids: dict[str, int] = {}
    for key in sorted(specs):
        a, b = specs[key]["bounds"]
        event_ids[key] = kb.add_event(iv(a, b), specs[key].get("location", "m1"))
    for key in sorted(specs):
        eid = event_ids[key]
        for label in sorted(specs[key].get("subjects", ())):
            kb.link(Relation.PARTICIPATION, subject_ids[label], eid, Provenance.MAPPED)
        for label in sorted(specs[key].get("objects", ())):
            kb.link(Relation.USES, eid, object_ids[label], Provenance.MAPPED)
    return kb, event_ids


def random_specs(rng: random.Random, n_events: int, span: int = 40) -> dict[str, dict]:
    """Random event specs drawing from pools of three subjects and objects."""
    subjects = ["s1", "s2", "s3"]
    objects = ["o1", "o2", "o3"]
    specs = {}
    for n in range(n_events):
        a = rng.randint(0, span)
        b = rng.randint(a, span)
        specs[f"e{n:03d}"] = {
            "bounds": (a, b),
            "subjects": set(rng.sample(subjects, rng.randint(0, len(subjects)))),
            "objects": set(rng.sample(objects, rng.randint(0, len(objects)))),
        }
    return specs
