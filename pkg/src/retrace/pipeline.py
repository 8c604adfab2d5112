"""Staged pipeline with hash-chained, independently verifiable stage files.

Each stage reads the previous stage's file, verifies its self-hash, and
writes its own output embedding the input's hash, so the final report is
linked back to the source files through a checkable chain.  Stage files
contain no clocks or environment data: running twice on the same inputs
produces byte-identical artifacts.
"""
from __future__ import annotations

import hashlib
import json
import os
from typing import Iterable, Optional, Union

from .config import RunConfig
from .correlation import correlate_all, correlation
from .errors import InputError, IntegrityError
from .extract import extract_all
from .inference import run_inference
from .kb import Footprint, KnowledgeBase, Relation, attributes_from_json, attributes_to_json
from .mapping import map_footprints
from .timeline import RenderFormat, build_timeline, partition, render

STAGE_FOOTPRINTS = "footprints"
STAGE_MAPPED = "mapped"
STAGE_INFERRED = "inferred"
STAGE_CORRELATED = "correlated"
STAGE_SCORES = "scores"
KB_STAGES = (STAGE_MAPPED, STAGE_INFERRED, STAGE_CORRELATED)

FOOTPRINTS_FILE = "footprints.json"
INTEGRITY_FILE = "footprints.integrity.json"
MAPPED_FILE = "kb_mapped.json"
INFERRED_FILE = "kb_inferred.json"
CORRELATED_FILE = "kb_correlated.json"
SCORES_FILE = "scores.json"
TIMELINE_BASENAME = "timeline"

_EXTENSIONS = {RenderFormat.TEXT: "txt", RenderFormat.JSON: "json", RenderFormat.DOT: "dot"}


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def payload_hash(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def write_stage(path: str, stage: str, payload, input_sha256: Optional[str]) -> str:
    """Write one stage file; returns the payload hash for chaining."""
    digest = payload_hash(payload)
    doc = {
        "meta": {
            "stage": stage,
            "payload_sha256": digest,
            "input_sha256": input_sha256,
        },
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return digest


def read_stage(path: str, expected: Union[str, Iterable[str]]) -> tuple[dict, dict]:
    """Load a stage file, verifying its stage name and payload hash."""
    expected_stages = (expected,) if isinstance(expected, str) else tuple(expected)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read stage file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"stage file {path} is not valid JSON: {exc}") from None
    meta = doc.get("meta")
    payload = doc.get("payload")
    if not isinstance(meta, dict) or payload is None:
        raise InputError(f"stage file {path} has no meta/payload structure")
    if meta.get("stage") not in expected_stages:
        raise InputError(
            f"stage file {path} holds stage {meta.get('stage')!r}, "
            f"expected one of {list(expected_stages)}"
        )
    if payload_hash(payload) != meta.get("payload_sha256"):
        raise IntegrityError(f"stage file {path} failed its hash check; content was altered")
    return payload, meta


def footprint_to_dict(fp: Footprint) -> dict:
    return {
        "id": fp.id,
        "kind": fp.kind,
        "attributes": attributes_to_json(fp.attributes),
        "source_path": fp.source_path,
    }


def footprint_from_dict(data: dict) -> Footprint:
    return Footprint(
        data["id"], data["kind"], attributes_from_json(data["attributes"]), data["source_path"]
    )


def _ensure_out(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def stage_extract(config: RunConfig, out_dir: str) -> list[str]:
    """Sources -> footprints stage file plus the integrity sidecar."""
    out_dir = _ensure_out(out_dir)
    footprints, records = extract_all(list(config.sources), config.registry)
    payload = {
        "footprints": [footprint_to_dict(fp) for fp in sorted(footprints, key=lambda f: f.id)],
        "integrity": records,
    }
    sources_digest = payload_hash(records)
    out_path = os.path.join(out_dir, FOOTPRINTS_FILE)
    write_stage(out_path, STAGE_FOOTPRINTS, payload, sources_digest)
    sidecar = os.path.join(out_dir, INTEGRITY_FILE)
    with open(sidecar, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(records, sort_keys=True, indent=2) + "\n")
    return [out_path, sidecar]


def stage_map(config: RunConfig, footprints_path: str, out_dir: str) -> list[str]:
    """Footprints stage file -> mapped knowledge base."""
    out_dir = _ensure_out(out_dir)
    payload, meta = read_stage(footprints_path, STAGE_FOOTPRINTS)
    footprints = [footprint_from_dict(d) for d in payload["footprints"]]
    kb = KnowledgeBase()
    for record in payload.get("integrity", []):
        kb.record_integrity(record["source_path"], record["sha256"])
    map_footprints(kb, footprints, config.mapping_rules, config.scene)
    out_path = os.path.join(out_dir, MAPPED_FILE)
    write_stage(out_path, STAGE_MAPPED, kb.to_dict(), meta["payload_sha256"])
    return [out_path]


def stage_infer(config: RunConfig, kb_path: str, out_dir: str) -> list[str]:
    """Knowledge base -> knowledge base extended to the inference fixpoint."""
    out_dir = _ensure_out(out_dir)
    payload, meta = read_stage(kb_path, KB_STAGES)
    kb = KnowledgeBase.from_dict(payload)
    run_inference(kb, config.inference_rules, config.max_rounds)
    out_path = os.path.join(out_dir, INFERRED_FILE)
    write_stage(out_path, STAGE_INFERRED, kb.to_dict(), meta["payload_sha256"])
    return [out_path]


def stage_correlate(config: RunConfig, kb_path: str, out_dir: str) -> list[str]:
    """Knowledge base -> correlation edges plus the ranked score table."""
    out_dir = _ensure_out(out_dir)
    payload, meta = read_stage(kb_path, KB_STAGES)
    kb = KnowledgeBase.from_dict(payload)
    scores = correlate_all(kb, config.correlation, config.expert_rules)
    kb_path_out = os.path.join(out_dir, CORRELATED_FILE)
    write_stage(kb_path_out, STAGE_CORRELATED, kb.to_dict(), meta["payload_sha256"])
    scores_path = os.path.join(out_dir, SCORES_FILE)
    write_stage(
        scores_path,
        STAGE_SCORES,
        {"scores": [sc.to_dict() for sc in scores]},
        meta["payload_sha256"],
    )
    return [kb_path_out, scores_path]


def stage_timeline(
    config: RunConfig,
    kb_path: str,
    out_dir: str,
    formats: Optional[tuple[RenderFormat, ...]] = None,
) -> list[str]:
    """Knowledge base -> rendered timeline reports, one file per format."""
    out_dir = _ensure_out(out_dir)
    payload, meta = read_stage(kb_path, KB_STAGES)
    kb = KnowledgeBase.from_dict(payload)
    labels = partition(kb, config.scene.illicit_catalog, config.correlation.threshold)
    retained = sorted(
        {
            (edge.source_id, edge.target_id)
            for edge in kb.edges
            if edge.relation is Relation.CORRELATED
        }
    )
    scores = [
        correlation(kb, first, second, config.correlation, config.expert_rules)
        for first, second in retained
    ]
    tl = build_timeline(kb, scores, labels)
    out_paths = []
    for fmt in formats or config.formats:
        document = render(tl, fmt, input_sha256=meta["payload_sha256"])
        out_path = os.path.join(out_dir, f"{TIMELINE_BASENAME}.{_EXTENSIONS[fmt]}")
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(document)
        out_paths.append(out_path)
    return out_paths


def run_all(
    config: RunConfig,
    out_dir: Optional[str] = None,
    formats: Optional[tuple[RenderFormat, ...]] = None,
) -> list[str]:
    """Run every stage in order; returns all written paths."""
    out_dir = _ensure_out(out_dir or config.output_dir)
    written = stage_extract(config, out_dir)
    written += stage_map(config, os.path.join(out_dir, FOOTPRINTS_FILE), out_dir)
    written += stage_infer(config, os.path.join(out_dir, MAPPED_FILE), out_dir)
    written += stage_correlate(config, os.path.join(out_dir, INFERRED_FILE), out_dir)
    written += stage_timeline(config, os.path.join(out_dir, CORRELATED_FILE), out_dir, formats)
    return written
