"""Footprint extraction: formats, schemas, coercion, source integrity."""
from __future__ import annotations

import hashlib

import pytest

from retrace import (
    ExtractorRegistry,
    FieldSpec,
    InputError,
    SourceDescriptor,
    SourceFormat,
    Timestamp,
    extract,
    extract_all,
)
from retrace.extract import footprints_to_facttext
from conftest import DEMO_SOURCE


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_demo_source_yields_nine_typed_footprints(demo_footprints):
    assert [fp.id for fp in demo_footprints] == list(range(1, 10))
    kinds = [fp.kind for fp in demo_footprints]
    assert kinds.count("fWebpage") == 3
    assert kinds.count("fVisit") == 3
    assert kinds.count("fBookmark") == 2
    assert kinds.count("fDownload") == 1
    by_id = {fp.id: fp for fp in demo_footprints}
    assert by_id[4].attributes["date"] == Timestamp.parse("2013-08-14T10:35:43")
    assert by_id[4].attributes["session"] == 351
    assert by_id[1].attributes["hostname"] == "www.bbc.com"
    assert by_id[9].attributes["URLTarget"] == "C:\\Users\\UserA\\Desktop\\"
    assert all(fp.source_path == str(DEMO_SOURCE) for fp in demo_footprints)


def test_integrity_record_carries_the_file_hash():
    _, record = extract(SourceDescriptor(str(DEMO_SOURCE)))
    expected = hashlib.sha256(DEMO_SOURCE.read_bytes()).hexdigest()
    assert record == {"source_path": str(DEMO_SOURCE), "sha256": expected}


def test_missing_source_is_an_input_error(tmp_path):
    with pytest.raises(InputError):
        extract(SourceDescriptor(str(tmp_path / "absent.facts")))


def test_wrong_arity_is_reported_with_position(tmp_path):
    path = write(tmp_path, "bad.facts", 'fVisit(4, "2013-08-14T10:35:43", 351).')
    with pytest.raises(InputError) as err:
        extract(SourceDescriptor(path))
    assert f"{path}:1" in str(err.value)
    assert "4 arguments" in str(err.value)


def test_malformed_timestamp_is_reported(tmp_path):
    path = write(tmp_path, "bad.facts", 'fVisit(4, "now", 351, 165).')
    with pytest.raises(InputError) as err:
        extract(SourceDescriptor(path))
    assert "date" in str(err.value)


def test_unknown_kind_is_rejected_unless_filtered(tmp_path):
    path = write(tmp_path, "mixed.facts", 'fMystery(1, "x").\nfVisit(2, "2013-08-14T10:35:43", 351, 165).')
    with pytest.raises(InputError):
        extract(SourceDescriptor(path))
    footprints, _ = extract(SourceDescriptor(path, kinds=("fVisit",)))
    assert [fp.id for fp in footprints] == [2]


def test_jsonl_records_with_kind_hint(tmp_path):
    path = write(
        tmp_path,
        "visits.jsonl",
        '{"id": 4, "date": "2013-08-14T10:35:43", "session": 351, "pageID": 165}\n'
        '\n'
        '{"kind": "fBookmark", "id": 8, "date": "2013-08-14T10:35:53", '
        '"bookmarkTitle": "Download", "pageID": 165}\n',
    )
    footprints, _ = extract(
        SourceDescriptor(path, SourceFormat.JSONL, kind_hint="fVisit")
    )
    assert [fp.kind for fp in footprints] == ["fVisit", "fBookmark"]
    assert footprints[0].attributes["date"] == Timestamp.parse("2013-08-14T10:35:43")


def test_jsonl_unknown_field_is_rejected(tmp_path):
    path = write(
        tmp_path,
        "visits.jsonl",
        '{"kind": "fVisit", "id": 4, "date": "2013-08-14T10:35:43", '
        '"session": 351, "pageID": 165, "color": "red"}\n',
    )
    with pytest.raises(InputError) as err:
        extract(SourceDescriptor(path, SourceFormat.JSONL))
    assert "color" in str(err.value)


def test_csv_requires_kind_hint_and_parses_rows(tmp_path):
    text = "id,date,session,pageID\n4,2013-08-14T10:35:43,351,165\n"
    path = write(tmp_path, "visits.csv", text)
    with pytest.raises(InputError):
        extract(SourceDescriptor(path, SourceFormat.CSV))
    footprints, _ = extract(SourceDescriptor(path, SourceFormat.CSV, kind_hint="fVisit"))
    assert footprints[0].attributes == {
        "date": Timestamp.parse("2013-08-14T10:35:43"),
        "session": 351,
        "pageID": 165,
    }


def test_registry_rejects_duplicates_and_bad_schemas():
    registry = ExtractorRegistry()
    with pytest.raises(InputError):
        registry.register_kind("fVisit", (FieldSpec("id", "int"),))
    with pytest.raises(InputError):
        registry.register_kind("fNew", (FieldSpec("when", "timestamp"),))
    registry.register_kind("fNew", (FieldSpec("id", "int"), FieldSpec("note", "str", required=False)))
    assert registry.schema_for("fNew")[1].name == "note"
    with pytest.raises(InputError):
        registry.schema_for("fUnseen")


def test_custom_kind_with_optional_field(tmp_path):
    registry = ExtractorRegistry().register_kind(
        "fNew", (FieldSpec("id", "int"), FieldSpec("note", "str", required=False))
    )
    path = write(tmp_path, "new.facts", 'fNew(1, "hello").\nfNew(2, "").')
    footprints, _ = extract(SourceDescriptor(path), registry)
    assert footprints[0].attributes == {"note": "hello"}
    assert footprints[1].attributes == {}


def test_extract_all_rejects_colliding_ids(tmp_path):
    a = write(tmp_path, "a.facts", 'fVisit(4, "2013-08-14T10:35:43", 351, 165).')
    b = write(tmp_path, "b.facts", 'fVisit(4, "2013-08-14T10:55:41", 410, 153).')
    with pytest.raises(InputError) as err:
        extract_all([SourceDescriptor(a), SourceDescriptor(b)])
    assert "4" in str(err.value)
    footprints, records = extract_all([SourceDescriptor(a)])
    assert len(footprints) == 1 and len(records) == 1


def test_facttext_round_trip(tmp_path, demo_footprints):
    path = write(tmp_path, "again.facts", footprints_to_facttext(demo_footprints))
    again, _ = extract(SourceDescriptor(path))
    original = [(fp.id, fp.kind, fp.attributes) for fp in demo_footprints]
    assert [(fp.id, fp.kind, fp.attributes) for fp in again] == original
