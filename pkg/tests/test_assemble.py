import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quality_fixtures import make_plan
from synbuild import labels as L
from synbuild.assemble import (
    AssemblyError,
    contract_plan,
    enumerate_stackings,
    extrude_floor,
    floor_classes,
    floor_contiguous,
    permutation_count,
    snap_to_footprint,
    split_t_junctions,
    stack_floors,
    stacking_count,
)
from synbuild.exterior import ExteriorSpec, RoofKind, hull_from_spec
from synbuild.geomcore import FootprintPolygon, rectangle
from synbuild.quality import building_loops_closed, check_unique_nodes


@pytest.fixture(scope="module")
def building():
    hull = hull_from_spec(ExteriorSpec(9.0, 6.0, 2, roof=RoofKind.GABLED, roof_rise=1.5))
    plan = make_plan()
    units = [extrude_floor(plan, z0, z1, plan_id=f"p{k}", footprint=fp)
             for k, (fp, z0, z1) in enumerate(zip(hull.floor_footprints, hull.z_levels[:-1], hull.z_levels[1:]))]
    return hull, plan, stack_floors(hull, units)


def test_extrude_counts(building):
    _, plan, b = building
    u = b.units[0]
    n = len(plan.nodes)
    opening = {i for (a, c), _ in plan.doors for i in (a, c)}
    assert len(u.points) == n + n - len(opening)
    assert len(u.doors) == 3 and len(u.windows) == 0
    front = [r for r, lab in u.doors if lab == L.FRONT_DOOR][0]
    assert front[:, 2].max() == pytest.approx(2.1)


def test_extrude_rejects_low_storey():
    with pytest.raises(AssemblyError, match="fit"):
        extrude_floor(make_plan(), 0.0, 2.0)
    with pytest.raises(AssemblyError):
        extrude_floor(make_plan(), 3.0, 3.0)


def test_stack_shares_slabs(building):
    hull, plan, b = building
    # ground ring + shared slab at 3 m + top ring at 6 m
    zs = np.round(b.points[:, 2], 6)
    assert set(zs.tolist()) >= {0.0, 3.0, 6.0}
    assert len(b.units) == 2 and b.plan_ids == ("p0", "p1")
    assert floor_contiguous(b)
    b.wireframe.validate()


def test_streams_unique(building):
    _, _, b = building
    ok, diags = check_unique_nodes(b.streams())
    assert ok, diags


def test_room_loops_closed(building):
    _, _, b = building
    assert building_loops_closed(b.adjacency, b.room_type_dict)
    assert sorted(b.room_type_dict) == [L.LIVING_ROOM, L.KITCHEN, L.BATHROOM]
    assert all(len(v) == 2 for v in b.room_type_dict.values())


def test_roof_stream_is_on_building(building):
    _, _, b = building
    key = {tuple(p) for p in b.points.tolist()}
    assert all(tuple(p) in key for p in b.roof_points.tolist())


def test_stack_validates_levels(building):
    hull, plan, _ = building
    u = extrude_floor(plan, 0.0, 3.0)
    with pytest.raises(AssemblyError, match="units for"):
        stack_floors(hull, [u])
    with pytest.raises(AssemblyError, match="spans"):
        stack_floors(hull, [u, u])


def test_split_t_junctions():
    pts = np.array([[0, 0, 0], [4, 0, 0], [1, 0, 0], [3, 0, 0], [2, 1, 0]], dtype=float)
    edges, paths = split_t_junctions(pts, [(0, 1), (2, 4)])
    assert paths[(0, 1)] == [0, 2, 3, 1]
    assert edges == {(0, 2), (2, 3), (1, 3), (2, 4)}


def test_snap_and_contract():
    fp = rectangle(0, 0, 9, 6)
    plan = make_plan()
    nodes = np.array(plan.nodes)
    nodes[2] += (0.05, -0.04)  # corner (9, 0) knocked off
    nodes[3] += (0.03, 0.0)  # wall node on the east edge
    from synbuild.vectorize import VectorFloorPlan

    moved = VectorFloorPlan(nodes, plan.adjacency, plan.rooms, plan.doors)
    snapped = snap_to_footprint(moved, fp, tol=0.1)
    assert tuple(snapped.nodes[2]) == (9.0, 0.0)
    assert snapped.nodes[3][0] == 9.0
    merged = contract_plan(plan, {13: 12})
    assert len(merged.nodes) == len(plan.nodes) - 1
    assert len(merged.doors) == 2  # door 12-13 collapsed away


def test_floor_classes():
    a = rectangle(0, 0, 5, 4)
    b = rectangle(3, 3, 5, 4)
    c = FootprintPolygon(((0, 0), (5, 0), (5, 4), (1, 4), (0, 3)))
    assert floor_classes([a, b, c, a]) == [0, 0, 1, 0]


# ---------------------------------------------------------------------------
# counting


def test_permutation_count_values():
    assert permutation_count(12, 4) == 11880
    assert permutation_count(5, 0) == 1
    with pytest.raises(ValueError):
        permutation_count(2, 3)


def test_stacking_count_reuse_once():
    assert stacking_count(3, 3) == 6
    # 3 floors from 2 plans: one plan twice, 2 * 3 = 6 sequences
    assert stacking_count(2, 3) == 6
    assert stacking_count(2, 4) == 6
    assert stacking_count(1, 3) == 0


def _brute(n, r):
    return sum(
        1
        for seq in itertools.product(range(n), repeat=r)
        if all(1 <= seq.count(k) <= 2 for k in set(seq)) and (r <= n and len(set(seq)) == r or r > n and len(set(seq)) == n)
    )


@pytest.mark.parametrize("n,r", [(n, r) for n in range(1, 6) for r in range(1, 7)])
def test_stacking_count_matches_brute_force(n, r):
    assert stacking_count(n, r) == _brute(n, r)


def test_enumeration_distinct_and_complete():
    orders = enumerate_stackings({0: ["a", "b", "c", "d"]}, 3)
    ids = [o.plan_ids for o in orders]
    assert len(ids) == len(set(ids)) == 24
    assert set(ids) == set(itertools.permutations("abcd", 3))


def test_enumeration_cap_is_seeded():
    plans = {0: [f"p{i}" for i in range(8)]}
    a = enumerate_stackings(plans, 4, cap=8, seed=1)
    b = enumerate_stackings(plans, 4, cap=8, seed=1)
    c = enumerate_stackings(plans, 4, cap=8, seed=2)
    assert a == b and len(a) == 8 and a != c
    assert len({o.plan_ids for o in a}) == 8


def test_top_floor_class_drawn_per_order():
    plans = {0: ["a", "b", "c"], 1: ["t1", "t2"]}
    orders = enumerate_stackings(plans, [0, 0, 0, 1], seed=3)
    assert len(orders) == 6
    assert all(o.plan_ids[3] in ("t1", "t2") for o in orders)
    assert {o.plan_ids[:3] for o in orders} == set(itertools.permutations("abc"))


def test_enumeration_errors():
    with pytest.raises(AssemblyError):
        enumerate_stackings({0: ["a"]}, 3)
    with pytest.raises(AssemblyError, match="no valid plans"):
        enumerate_stackings({0: ["a"], 1: []}, [0, 1])
    with pytest.raises(AssemblyError):
        enumerate_stackings({0: ["a"], 1: ["b"]}, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 5), st.integers(1, 10), st.integers(0, 1000))
def test_capped_orders_are_a_subset(n, r, cap, seed):
    plans = {0: list(range(n))}
    total = stacking_count(n, r)
    if total == 0:
        return
    orders = enumerate_stackings(plans, r, cap=cap, seed=seed)
    assert len(orders) == min(cap, total)
    assert len({o.plan_ids for o in orders}) == len(orders)
    for o in orders:
        counts = [o.plan_ids.count(k) for k in set(o.plan_ids)]
        assert max(counts) <= (1 if r <= n else 2)
