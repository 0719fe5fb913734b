"""Thirty handcrafted plans with the expected outcome of each quality check.

The base plan is a 9 x 6 m box split into rooms A (west), B (south-east)
and C (north-east)::

    6 +-----------5-------------4
      |  A        |      C      |
      |           7---12--13----3
      |          15             |
      |          14      B      |
      |          11             |
      |          10             |
    0 +--8--9-----1-------------2

Doors: front door 8-9 into A, A-B through 10-11, B-C through 12-13.
"""

import numpy as np

from synbuild import labels as L
from synbuild.geomcore import BinaryBitmap, LabelGrid
from synbuild.quality import CHECKS
from synbuild.vectorize import VectorFloorPlan

NODES = [
    (0, 0), (4, 0), (9, 0), (9, 3), (9, 6), (4, 6), (0, 6), (4, 3),
    (1, 0), (2, 0),
    (4, 0.5), (4, 1.2),
    (6, 3), (7, 3),
    (4, 1.8), (4, 2.5),
]
EDGES = [
    (0, 8), (8, 9), (9, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 0),
    (1, 10), (10, 11), (11, 14), (14, 15), (15, 7), (7, 5),
    (7, 12), (12, 13), (13, 3),
]
ROOM_A = (0, 8, 9, 1, 10, 11, 14, 15, 7, 5, 6)
ROOM_B = (1, 2, 3, 13, 12, 7, 15, 14, 11, 10)
ROOM_C = (7, 12, 13, 3, 4, 5)
ROOMS = [(ROOM_A, L.LIVING_ROOM), (ROOM_B, L.KITCHEN), (ROOM_C, L.BATHROOM)]
FRONT = ((8, 9), L.FRONT_DOOR)
AB = ((10, 11), L.INTERIOR_DOOR)
BC = ((12, 13), L.INTERIOR_DOOR)
DOORS = [FRONT, AB, BC]


def make_plan(nodes=None, edges=None, rooms=None, doors=None, drop_edges=()):
    nodes = np.array(NODES if nodes is None else nodes, dtype=float).reshape(-1, 2)
    edges = [e for e in (EDGES if edges is None else edges) if e not in drop_edges]
    adj = np.zeros((len(nodes), len(nodes)), dtype=np.uint8)
    for a, b in edges:
        adj[a, b] = adj[b, a] = 1
    return VectorFloorPlan(nodes, adj, ROOMS if rooms is None else rooms, DOORS if doors is None else doors)


def make_grid(hole=None, external=None, outside_zero=False):
    """12 x 12 grid with the footprint on rows/cols 2..9."""
    labels = np.full((12, 12), L.EXTERNAL, dtype=np.uint8)
    labels[2:10, 2:10] = L.EXTERIOR_WALL
    labels[3:9, 3:9] = L.LIVING_ROOM
    labels[5, 3:9] = L.INTERIOR_WALL
    labels[5, 5] = L.INTERIOR_DOOR
    if outside_zero:
        labels[0:2, :] = 0
    if hole is not None:
        labels[hole] = 0
    if external is not None:
        labels[external] = L.EXTERNAL
    bits = np.zeros((12, 12), dtype=np.uint8)
    bits[2:10, 2:10] = 1
    return LabelGrid(labels, 1.0), BinaryBitmap(bits)


def expect(**fails):
    """Every check passes except those named with False."""
    out = {c: True for c in CHECKS}
    out.update(fails)
    return out


def _with_node(p, connect=None):
    nodes = NODES + [p]
    edges = EDGES + ([(connect, len(NODES))] if connect is not None else [])
    return nodes, edges


def fixtures():
    g_ok = make_grid()
    out = []

    def add(name, plan, expected, grid=g_ok):
        out.append((name, plan, grid, expected))

    add("base", make_plan(), expect())
    add("two_rooms", make_plan(rooms=ROOMS[:2], doors=[FRONT, AB]), expect(MinRoomCount=False))
    add("one_room", make_plan(rooms=ROOMS[:1], doors=[FRONT]), expect(MinRoomCount=False))
    add("no_rooms_no_doors", make_plan(rooms=[], doors=[]), expect(MinRoomCount=False, DoorRoomConsistency=False))
    add("unreachable_room", make_plan(doors=[FRONT, AB, ((14, 15), L.INTERIOR_DOOR)]),
        expect(DoorRoomConsistency=False))
    add("extra_door", make_plan(doors=DOORS + [((14, 15), L.INTERIOR_DOOR)]), expect(DoorRoomConsistency=False))
    add("missing_door", make_plan(doors=[FRONT, AB]), expect(DoorRoomConsistency=False))
    add("no_front_door", make_plan(doors=[((8, 9), L.INTERIOR_DOOR), AB, BC]), expect(DoorRoomConsistency=False))
    add("door_touches_no_room", make_plan(doors=[FRONT, AB, ((0, 4), L.INTERIOR_DOOR)]),
        expect(DoorRoomConsistency=False))
    add("open_room_missing_wall", make_plan(drop_edges=[(3, 4)]), expect(RoomEnclosure=False))
    add("open_room_loop_skips_node", make_plan(rooms=[ROOMS[0], ROOMS[1], ((7, 12, 13, 3, 5), L.BATHROOM)]),
        expect(RoomEnclosure=False))
    # a two-node loop is not enclosed, and door 12-13 no longer borders it
    add("degenerate_loop", make_plan(rooms=ROOMS[:2] + [((7, 12), L.BATHROOM)]),
        expect(RoomEnclosure=False, DoorRoomConsistency=False))
    add("loop_index_out_of_range", make_plan(rooms=ROOMS[:2] + [((7, 12, 13, 3, 4, 99), L.BATHROOM)]),
        expect(RoomEnclosure=False))
    n, e = _with_node((9 + 5e-5, 0))
    add("duplicate_node_within_eps", make_plan(n, e), expect(UniqueNodes=False))
    n, e = _with_node((4, 6), connect=6)
    add("duplicate_node_exact", make_plan(n, e), expect(UniqueNodes=False))
    n, e = _with_node((9 + 2e-4, 0))
    add("near_node_beyond_eps", make_plan(n, e), expect())
    add("uncovered_pixel_zero", make_plan(), expect(SemanticCoverage=False), make_grid(hole=(4, 4)))
    add("uncovered_pixel_external", make_plan(), expect(SemanticCoverage=False), make_grid(external=(6, 7)))
    add("unlabeled_outside_footprint", make_plan(), expect(), make_grid(outside_zero=True))
    add("uncovered_wall_corner", make_plan(), expect(SemanticCoverage=False), make_grid(hole=(9, 9)))
    add("open_room_and_duplicate_node", make_plan(*_with_node((0, 6 + 1e-6)), drop_edges=[(3, 4)]),
        expect(RoomEnclosure=False, UniqueNodes=False))
    add("two_rooms_uncovered", make_plan(rooms=ROOMS[:2], doors=[FRONT, AB]),
        expect(MinRoomCount=False, SemanticCoverage=False), make_grid(hole=(3, 3)))
    add("balcony_door_counts", make_plan(doors=[FRONT, AB, ((12, 13), L.BALCONY_DOOR)]), expect())
    add("second_entrance", make_plan(doors=[FRONT, AB, ((3, 4), L.FRONT_DOOR)]), expect())
    add("clockwise_loop", make_plan(rooms=ROOMS[:2] + [(ROOM_C[::-1], L.BATHROOM)]), expect())
    add("c_reached_through_a", make_plan(doors=[FRONT, AB, ((7, 5), L.INTERIOR_DOOR)]), expect())
    add("empty_plan", make_plan(nodes=np.zeros((0, 2)), edges=[], rooms=[], doors=[]),
        expect(MinRoomCount=False, DoorRoomConsistency=False))
    add("open_and_unreachable", make_plan(doors=[FRONT, AB, ((14, 15), L.INTERIOR_DOOR)], drop_edges=[(3, 4)]),
        expect(RoomEnclosure=False, DoorRoomConsistency=False))
    add("same_door_twice", make_plan(doors=DOORS + [BC]), expect(DoorRoomConsistency=False))
    add("everything_wrong", make_plan(*_with_node((1, 0)), rooms=ROOMS[:2] + [((7, 12), L.BATHROOM)], doors=[AB]),
        expect(MinRoomCount=True, RoomEnclosure=False, DoorRoomConsistency=False, UniqueNodes=False,
               SemanticCoverage=False), make_grid(hole=(2, 5)))
    return out
