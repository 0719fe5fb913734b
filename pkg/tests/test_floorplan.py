import math

import numpy as np
import pytest
from scipy import ndimage

from synbuild import labels as L
from synbuild.exterior import generate_exterior
from synbuild.floorplan import (
    FloorplanConfig,
    FrontDoorPlacement,
    generate_floorplan,
    grid_hash,
    place_front_door,
)
from synbuild.geomcore import FootprintPolygon, GeometryError, rasterize_polygon, rectangle


@pytest.fixture(scope="module")
def box_plan():
    fp = rectangle(0, 0, 12, 9)
    return fp, generate_floorplan(fp, place_front_door(fp, 1), seed=1)


def test_front_door_is_deterministic_and_fits():
    fp = rectangle(0, 0, 12, 9)
    d = place_front_door(fp, 5, width=1.0)
    assert d == place_front_door(fp, 5, width=1.0)
    a, b = d.segment(fp)
    assert math.dist(a, b) == pytest.approx(1.0)
    with pytest.raises(GeometryError):
        place_front_door(rectangle(0, 0, 0.5, 0.5), 0, width=0.9)
    with pytest.raises(GeometryError):
        FrontDoorPlacement(0, 0.5, 20.0).segment(fp)


def test_labels_are_valid(box_plan):
    _, cand = box_plan
    ids = set(np.unique(cand.grid.labels).tolist())
    assert ids <= L.VALID_IDS
    assert L.FRONT_DOOR in ids and L.EXTERIOR_WALL in ids and L.LIVING_ROOM in ids


def test_single_front_door_component(box_plan):
    _, cand = box_plan
    assert ndimage.label(cand.grid.labels == L.FRONT_DOOR)[1] == 1


def test_room_count_in_range(box_plan):
    _, cand = box_plan
    cfg = FloorplanConfig()
    assert cfg.min_rooms <= len(cand.rooms) <= cfg.max_rooms
    assert sum(1 for _, t in cand.rooms if t == L.LIVING_ROOM) == 1


def test_footprint_fully_labeled(box_plan):
    fp, cand = box_plan
    inside = rasterize_polygon(fp, cand.grid.scale, frame=cand.grid.frame).bits.astype(bool)
    lab = cand.grid.labels
    assert not np.any(inside & ((lab == 0) | (lab == L.EXTERNAL)))
    assert not np.any(~inside & np.isin(lab, sorted(L.ROOM_IDS)))


def test_generation_is_deterministic(box_plan):
    fp, cand = box_plan
    again = generate_floorplan(fp, place_front_door(fp, 1), seed=1)
    assert grid_hash(again.grid) == grid_hash(cand.grid)
    assert again.id == cand.id
    other = generate_floorplan(fp, place_front_door(fp, 1), seed=2)
    assert grid_hash(other.grid) != grid_hash(cand.grid)


def test_candidate_id_override(box_plan):
    fp, _ = box_plan
    c = generate_floorplan(fp, place_front_door(fp, 1), seed=1, candidate_id="fp_custom")
    assert c.id == "fp_custom"


@pytest.mark.parametrize("seed", range(8))
def test_generated_footprints(seed):
    fp = generate_exterior(seed).floor_footprints[0]
    cand = generate_floorplan(fp, place_front_door(fp, seed), seed=seed)
    assert cand.grid.labels.shape == (256, 256)
    assert len(cand.rooms) >= 3


def test_oblique_footprint():
    fp = FootprintPolygon(((0, 0), (12, 0), (12, 6), (8, 10), (0, 10)))
    cand = generate_floorplan(fp, place_front_door(fp, 0), seed=3)
    assert len(cand.rooms) >= 3


def test_config_validation():
    with pytest.raises(GeometryError):
        FloorplanConfig(min_rooms=2).validate()
    with pytest.raises(GeometryError):
        FloorplanConfig(grid_size=16).validate()
    with pytest.raises(GeometryError, match="invalid id"):
        FloorplanConfig(room_weights={L.LIVING_ROOM: 1.0}).validate()
