import copy
import json

import numpy as np
import pytest

from synbuild import labels as L
from synbuild.records import (
    FIELDS,
    BuildingRecord,
    RecordValidationError,
    emit_record,
    export_obj,
    exterior_of,
    find_records,
    load_mask,
    load_record,
    parse_obj,
    serialize,
    validate_body,
    write_plan_images,
)


@pytest.fixture(scope="module")
def body(small_run):
    return json.loads(find_records(small_run)[0].read_bytes())


def test_output_tree(small_run):
    paths = find_records(small_run)
    assert paths
    for p in paths:
        assert p.parent.parent.name == "final_building_outdir"
        assert exterior_of(p) == p.parent.name and p.parent.name.startswith("building_")
        assert p.name == f"final_building_{load_record(p).content_hash()}.json"


def test_canonical_bytes(small_run):
    p = find_records(small_run)[0]
    rec = load_record(p)
    assert rec.to_bytes() == p.read_bytes()
    assert serialize(json.loads(p.read_bytes())) == p.read_bytes()


def test_emit_is_idempotent(body, tmp_path):
    rec = BuildingRecord(body)
    a = emit_record(rec, tmp_path, "e1")
    b = emit_record(rec, tmp_path, "e1")
    assert a == b and a.read_bytes() == rec.to_bytes()
    assert list(a.parent.iterdir()) == [a]


@pytest.mark.parametrize("field", FIELDS)
def test_missing_field_is_named(body, field):
    broken = {k: v for k, v in body.items() if k != field}
    with pytest.raises(RecordValidationError) as e:
        validate_body(broken)
    assert e.value.field == field


def test_stream_errors(body):
    b = copy.deepcopy(body)
    b["final_door_adj"] = b["final_door_adj"][:-1]
    with pytest.raises(RecordValidationError, match="final_door_adj"):
        validate_body(b)
    b = copy.deepcopy(body)
    b["final_building_adj"][0][1] = 1 - b["final_building_adj"][1][0]
    with pytest.raises(RecordValidationError, match="symmetric"):
        validate_body(b)
    b = copy.deepcopy(body)
    b["final_building_points"][0] = [0, 0]
    with pytest.raises(RecordValidationError, match="final_building_points"):
        validate_body(b)


def test_room_and_unit_errors(body):
    b = copy.deepcopy(body)
    b["final_room_type_dict"]["14"] = [[0, 1, 2]]
    with pytest.raises(RecordValidationError, match="invalid room id 14"):
        validate_body(b)
    b = copy.deepcopy(body)
    b["final_room_type_dict"]["1"] = [[0, 1, 10**6]]
    with pytest.raises(RecordValidationError, match="missing point"):
        validate_body(b)
    b = copy.deepcopy(body)
    b["unit_dict_list"] = b["unit_dict_list"][:-1]
    with pytest.raises(RecordValidationError, match="unit_dict_list"):
        validate_body(b)
    b = copy.deepcopy(body)
    b["unit_dict_list"][0]["floorplan_ID"] = "nope"
    with pytest.raises(RecordValidationError, match="floorplan_ID"):
        validate_body(b)
    with pytest.raises(RecordValidationError, match="record"):
        validate_body([])


def test_invalid_json(tmp_path):
    p = tmp_path / "final_building_x.json"
    p.write_text("{not json")
    with pytest.raises(RecordValidationError, match="invalid JSON"):
        load_record(p)


def test_unit_openings_come_in_fours(body):
    for u in body["unit_dict_list"]:
        assert len(u["door_points"]) % 4 == 0 and len(u["window_points"]) % 4 == 0
        assert len(u["door_labels"]) == len(u["door_points"]) // 4
        assert u["door_labels"].count(L.FRONT_DOOR) >= 1


def test_obj_roundtrip(body):
    rec = BuildingRecord(body)
    verts, lines, groups = parse_obj(export_obj(rec))
    streams = ["building", "window", "door", "roof"]
    keys = ["final_building_points", "final_window_points", "final_door_points", "final_roof_points"]
    present = [s for s, k in zip(streams, keys) if body[k]]
    assert groups == present
    assert len(verts) == sum(len(body[k]) for k in keys)
    assert np.allclose(verts[: len(body[keys[0]])], body[keys[0]], atol=1e-6)
    n_edges = sum(int(np.triu(rec.array(k.replace("points", "adj")), 1).sum()) for k in keys if body[k])
    assert len(lines) == n_edges
    only = parse_obj(export_obj(rec, streams=("roof",)))
    assert only[2] == ["roof"] and len(only[0]) == len(body["final_roof_points"])


def test_mask_images_roundtrip(tmp_path):
    labels = np.zeros((16, 20), dtype=np.uint8)
    labels[3:9, 4:12] = L.KITCHEN
    labels[0, 0] = L.WINDOW
    write_plan_images(tmp_path, "p1", labels)
    assert np.array_equal(load_mask(tmp_path, "p1"), labels)
    assert (tmp_path / "deeplayout_visualization_outdir" / "p1.png").is_file()
