"""Event partitioning, timeline assembly, and the three report formats."""
from __future__ import annotations

import json

import pytest

from retrace import (
    AttributeCondition,
    IllicitPattern,
    InputError,
    PartitionLabel,
    Provenance,
    Relation,
    RenderFormat,
    ValidationError,
    build_timeline,
    correlate_all,
    correlation,
    partition,
    render,
)
from conftest import WAREZ_PATTERN
from util import build_event_kb


@pytest.fixture()
def correlated_kb(inferred_kb):
    scores = correlate_all(inferred_kb)
    return inferred_kb, scores


def test_demo_partition(correlated_kb):
    kb, _ = correlated_kb
    labels = partition(kb, [WAREZ_PATTERN])
    groups = {}
    for eid, label in labels.items():
        groups.setdefault(label, set()).add(eid)
    assert groups[PartitionLabel.ILLICIT] == {15, 16, 19, 20}
    assert groups[PartitionLabel.CORRELATED] == {17, 18}
    assert PartitionLabel.NOISE not in groups


def test_partition_threshold_drops_weak_connections(correlated_kb):
    kb, _ = correlated_kb
    labels = partition(kb, [WAREZ_PATTERN], correlation_threshold=2.0)
    assert labels[17] is PartitionLabel.NOISE
    assert labels[18] is PartitionLabel.NOISE
    assert labels[19] is PartitionLabel.ILLICIT


def test_partition_without_catalog_is_all_noise(correlated_kb):
    kb, _ = correlated_kb
    labels = partition(kb, [])
    assert set(labels.values()) == {PartitionLabel.NOISE}


def test_partition_only_follows_strong_correlation_edges():
    kb, ids = build_event_kb(
        {
            "hot": {"bounds": (0, 1), "objects": {"bad", "shared"}},
            "near": {"bounds": (0, 1), "objects": {"shared"}},
            "far": {"bounds": (50, 51)},
        }
    )
    pattern = IllicitPattern("bad-object", (AttributeCondition("object", "url", ("bad",)),))
    before = partition(kb, [pattern], correlation_threshold=1.0)
    assert before[ids["near"]] is PartitionLabel.NOISE
    correlate_all(kb)
    labels = partition(kb, [pattern], correlation_threshold=1.0)
    assert labels[ids["hot"]] is PartitionLabel.ILLICIT
    assert labels[ids["near"]] is PartitionLabel.CORRELATED
    assert labels[ids["far"]] is PartitionLabel.NOISE


def test_demo_timeline_order_and_annotations(correlated_kb):
    kb, scores = correlated_kb
    timeline = build_timeline(kb, scores, partition(kb, [WAREZ_PATTERN]))
    assert [entry.event_id for entry in timeline.entries] == [15, 19, 16, 20, 17, 18]
    by_id = {entry.event_id: entry for entry in timeline.entries}
    assert by_id[19].subject_ids == (13,)
    assert by_id[19].inferred_facts == ("participation(13, 19).",)
    assert by_id[15].inferred_facts == ()
    assert by_id[20].footprint_ids == (9,)
    assert by_id[17].label is PartitionLabel.CORRELATED
    assert timeline.correlations[0].first_id == 15
    assert timeline.correlations[0].second_id == 19
    assert timeline.causes == ()


def test_build_timeline_requires_labels_for_every_event(correlated_kb):
    kb, scores = correlated_kb
    labels = partition(kb, [WAREZ_PATTERN])
    labels.pop(17)
    with pytest.raises(ValidationError):
        build_timeline(kb, scores, labels)


def test_text_report_layout(correlated_kb):
    kb, scores = correlated_kb
    timeline = build_timeline(kb, scores, partition(kb, [WAREZ_PATTERN]))
    text = render(timeline, "text", input_sha256="ab" * 32)
    lines = text.splitlines()
    assert lines[0] == "# input kb sha256: " + "ab" * 32
    assert lines[1] == "timeline: 6 events, 15 retained correlations"
    first = lines[3]
    assert first.startswith("2013-08-14T10:35:43 .. 2013-08-14T10:35:43  event 15  [illicit]")
    assert "location=153.168.1.1" in first
    assert "subjects={13}" in first
    assert "objects={11}" in first
    assert "footprints={4}" in first
    assert "    inferred: participation(13, 19)." in lines
    assert "  correlated(15, 19)  total=2.045455" in text
    assert text.endswith("\n")


def test_text_report_omits_header_without_hash(correlated_kb):
    kb, scores = correlated_kb
    timeline = build_timeline(kb, scores, partition(kb, [WAREZ_PATTERN]))
    assert render(timeline, RenderFormat.TEXT).startswith("timeline: 6 events")


def test_json_report_round_trips(correlated_kb):
    kb, scores = correlated_kb
    timeline = build_timeline(kb, scores, partition(kb, [WAREZ_PATTERN]))
    doc = json.loads(render(timeline, RenderFormat.JSON, input_sha256="00" * 32))
    assert doc["input_sha256"] == "00" * 32
    assert [e["event_id"] for e in doc["events"]] == [15, 19, 16, 20, 17, 18]
    assert doc["events"][1]["inferred"] == ["participation(13, 19)."]
    assert doc["events"][0]["label"] == "illicit"
    assert doc["correlations"][0]["total"] == pytest.approx(2.0454545454545454, abs=0.0)
    assert doc["causes"] == []


def test_dot_report_shape(correlated_kb):
    kb, scores = correlated_kb
    timeline = build_timeline(kb, scores, partition(kb, [WAREZ_PATTERN]))
    dot = render(timeline, RenderFormat.DOT, input_sha256="cd" * 32)
    assert dot.startswith("digraph timeline {")
    assert "  // input kb sha256: " + "cd" * 32 in dot
    assert '  e15 [label="event 15' in dot
    assert '  e15 -> e19 [dir=none, label="2.045455"];' in dot
    assert dot.rstrip().endswith("}")


def test_causes_edges_appear_in_reports():
    kb, ids = build_event_kb(
        {
            "cause": {"bounds": (0, 3), "subjects": {"s1"}},
            "effect": {"bounds": (5, 8), "subjects": {"s1"}},
        }
    )
    kb.link(Relation.CAUSES, ids["cause"], ids["effect"], Provenance.ASSERTED)
    score = correlation(kb, ids["cause"], ids["effect"])
    labels = {eid: PartitionLabel.NOISE for eid in kb.events}
    timeline = build_timeline(kb, [score], labels)
    assert timeline.causes == ((ids["cause"], ids["effect"]),)
    text = render(timeline, "text")
    assert f"  causes({ids['cause']}, {ids['effect']})." in text
    dot = render(timeline, "dot")
    assert f'  e{ids["cause"]} -> e{ids["effect"]} [label="causes"];' in dot


def test_unknown_format_is_rejected(correlated_kb):
    kb, scores = correlated_kb
    timeline = build_timeline(kb, scores, partition(kb, [WAREZ_PATTERN]))
    with pytest.raises(InputError):
        render(timeline, "pdf")
