"""The five automated quality checks with locatable diagnostics."""

from collections import deque
from dataclasses import dataclass, field
import json

import numpy as np
from scipy.spatial import cKDTree

from . import labels as L
from .geomcore import EPS_MERGE, GeometryError

CHECKS = ("MinRoomCount", "SemanticCoverage", "RoomEnclosure", "DoorRoomConsistency", "UniqueNodes")
MIN_ROOMS = 3


@dataclass
class QualityReport:
    status: dict = field(default_factory=dict)  # check name -> bool
    diagnostics: list = field(default_factory=list)  # (check, location, message)

    @property
    def passed(self):
        # the five checks must all have run; extra structural checks count too
        return all(self.status.get(c, False) for c in CHECKS) and all(self.status.values())

    def record(self, check, ok, diags=()):
        self.status[check] = self.status.get(check, True) and bool(ok)
        self.diagnostics.extend((check, loc, msg) for loc, msg in diags)
        return ok

    def merge(self, other):
        for c, ok in other.status.items():
            self.record(c, ok)
        self.diagnostics.extend(other.diagnostics)
        return self

    def failed(self):
        extra = [c for c in self.status if c not in CHECKS and not self.status[c]]
        return [c for c in CHECKS if not self.status.get(c, False)] + extra

    def to_json(self, **extra):
        body = dict(extra)
        body["passed"] = self.passed
        names = list(CHECKS) + sorted(c for c in self.status if c not in CHECKS)
        body["checks"] = {c: ("pass" if self.status.get(c, False) else "fail") for c in names}
        body["diagnostics"] = [{"check": c, "location": _plain(loc), "message": m} for c, loc, m in self.diagnostics]
        return json.dumps(body, sort_keys=True)


def _plain(x):
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _loop_edges(loop):
    return [(loop[i], loop[(i + 1) % len(loop)]) for i in range(len(loop))]


def check_min_room_count(plan, minimum=MIN_ROOMS):
    n = len(plan.rooms)
    ok = n >= minimum
    return ok, ([] if ok else [(("rooms", n), f"{n} rooms, need at least {minimum}")])


def check_semantic_coverage(grid, footprint_bmp):
    labels = np.asarray(grid.labels)
    bits = np.asarray(getattr(footprint_bmp, "bits", footprint_bmp), dtype=bool)
    if labels.shape != bits.shape:
        raise GeometryError(f"label grid {labels.shape} and footprint bitmap {bits.shape} differ")
    bad = bits & ((labels == 0) | (labels == L.EXTERNAL))
    if not bad.any():
        return True, []
    rr, cc = np.nonzero(bad)
    return False, [((int(rr[0]), int(cc[0])), f"{int(bad.sum())} footprint pixels unlabeled, first at row {rr[0]} col {cc[0]}")]


def check_room_enclosure(plan):
    adj = plan.adjacency
    n = len(plan.nodes)
    diags = []
    for k, (loop, label) in enumerate(plan.rooms):
        if len(set(loop)) < 3:
            diags.append(((k,), f"room {k} loop has fewer than 3 nodes"))
            continue
        for a, b in _loop_edges(loop):
            if not (0 <= a < n and 0 <= b < n) or not adj[a, b]:
                diags.append(((k, a, b), f"room {k} ({L.NAMES.get(label, label)}) open between nodes {a} and {b}"))
                break
    return not diags, diags


def check_door_room_consistency(plan):
    """Doors (front door included) must equal rooms, and every room is reachable from the entrance."""
    room_edges = [{frozenset(e) for e in _loop_edges(loop)} for loop, _ in plan.rooms]
    diags = []
    starts = []
    links = {k: set() for k in range(len(plan.rooms))}
    for d, ((a, b), label) in enumerate(plan.doors):
        touching = [k for k, es in enumerate(room_edges) if frozenset((a, b)) in es]
        if not touching:
            diags.append(((d, a, b), f"door {d} touches no room"))
        if label == L.FRONT_DOOR:
            starts.extend(touching)
        else:
            for i in touching:
                links[i].update(j for j in touching if j != i)
    if not any(label == L.FRONT_DOOR for _, label in plan.doors):
        diags.append((("front_door",), "no front door"))
    if len(plan.doors) != len(plan.rooms):
        diags.append((("count", len(plan.doors), len(plan.rooms)), f"{len(plan.doors)} doors for {len(plan.rooms)} rooms"))
    seen = set(starts)
    queue = deque(starts)
    while queue:
        k = queue.popleft()
        for j in sorted(links[k]):
            if j not in seen:
                seen.add(j)
                queue.append(j)
    for k in range(len(plan.rooms)):
        if k not in seen:
            diags.append(((k,), f"room {k} is not reachable from the front door"))
    return not diags, diags


def _as_points(p):
    return np.asarray(p, dtype=float).reshape(-1, 3) if np.size(p) else np.zeros((0, 3))


def check_unique_nodes(streams, eps=EPS_MERGE):
    """No two points closer than ``eps`` within a stream; across streams only exact sharing is allowed.

    ``streams`` maps stream name -> (n, 3) points. A window, door or roof point
    may be the very same node as a building point (identical coordinates).
    """
    diags = []
    names = list(streams)
    arrays = [_as_points(streams[k]) for k in names]
    for name, pts in zip(names, arrays):
        if len(pts) > 1:
            pairs = sorted(cKDTree(pts).query_pairs(eps))
            if pairs:
                i, j = pairs[0]
                diags.append(((name, i, j), f"{name} points {i} and {j} closer than {eps}"))
    for x in range(len(names)):
        for y in range(x + 1, len(names)):
            a, b = arrays[x], arrays[y]
            if not len(a) or not len(b):
                continue
            for i, js in enumerate(cKDTree(b).query_ball_point(a, eps)):
                near = [j for j in js if not np.array_equal(a[i], b[j])]
                if near:
                    j = near[0]
                    diags.append(((names[x], i, names[y], j), f"{names[x]}[{i}] and {names[y]}[{j}] nearly coincide"))
                    break
    return not diags, diags


def plan_report(plan, grid=None, footprint_bmp=None):
    """Floor-level report; semantic coverage runs only when a grid and bitmap are given."""
    r = QualityReport()
    r.record("MinRoomCount", *check_min_room_count(plan))
    if grid is not None and footprint_bmp is not None:
        r.record("SemanticCoverage", *check_semantic_coverage(grid, footprint_bmp))
    r.record("RoomEnclosure", *check_room_enclosure(plan))
    r.record("DoorRoomConsistency", *check_door_room_consistency(plan))
    pts = np.column_stack([plan.nodes, np.zeros(len(plan.nodes))])
    r.record("UniqueNodes", *check_unique_nodes({"plan": pts}))
    return r


# ---------------------------------------------------------------------------
# floors and buildings


@dataclass(frozen=True)
class PlanView:
    """Duck-typed plan for the checks: nodes, adjacency, rooms, doors, windows."""

    nodes: np.ndarray
    adjacency: np.ndarray
    rooms: tuple
    doors: tuple
    windows: tuple = ()


def unit_view(points, adjacency, room_type_dict, door_rects, door_labels):
    """Rebuild a floor's plan from its 3D unit: door bottoms are ring points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    where = {tuple(p): i for i, p in reversed(list(enumerate(pts.tolist())))}
    doors = []
    for rect, lab in zip(door_rects, door_labels):
        r = np.asarray(rect, dtype=float).reshape(4, 3)
        a, b = where.get(tuple(r[0].tolist())), where.get(tuple(r[1].tolist()))
        doors.append(((-1 if a is None else a, -1 if b is None else b), int(lab)))
    rooms = tuple((tuple(loop), int(k)) for k, loops in sorted(room_type_dict.items(), key=lambda kv: int(kv[0])) for loop in loops)
    return PlanView(pts[:, :2], np.asarray(adjacency, dtype=np.uint8), rooms, tuple(doors))


def floor_units_report(views, report=None):
    r = report or QualityReport()
    for k, v in enumerate(views):
        sub = QualityReport()
        sub.record("MinRoomCount", *check_min_room_count(v))
        sub.record("RoomEnclosure", *check_room_enclosure(v))
        sub.record("DoorRoomConsistency", *check_door_room_consistency(v))
        for c, loc, msg in sub.diagnostics:
            r.diagnostics.append((c, ("floor", k, loc), msg))
        for c, ok in sub.status.items():
            r.record(c, ok)
    return r


def building_loops_closed(adjacency, room_type_dict):
    adj = np.asarray(adjacency)
    n = len(adj)
    diags = []
    for key, loops in room_type_dict.items():
        for loop in loops:
            for a, b in _loop_edges(list(loop)):
                if not (0 <= a < n and 0 <= b < n) or not adj[a, b]:
                    diags.append((("building", int(key), a, b), f"room {key} open between building nodes {a} and {b}"))
                    break
    return not diags, diags


def building_report(building, coverage=None):
    """All five checks on an assembled building.

    ``coverage`` maps plan id -> (ok, diagnostics) from the candidate stage.
    """
    r = QualityReport()
    views = [
        unit_view(u.points, u.adjacency, {k: v for k, v in u.room_map.items()}, [d for d, _ in u.doors], [lab for _, lab in u.doors])
        for u in building.units
    ]
    floor_units_report(views, r)
    r.record("RoomEnclosure", *building_loops_closed(building.adjacency, building.room_type_dict))
    cov = coverage or {}
    for k, pid in enumerate(building.plan_ids):
        ok, diags = cov.get(pid, (False, [(("plan", pid), "no coverage result")]))
        r.record("SemanticCoverage", ok, [(("floor", k, loc), msg) for loc, msg in diags])
    r.record("UniqueNodes", *check_unique_nodes(building.streams()))
    return r


def record_report(record, out_root=None):
    """Quality checks on a loaded record; coverage needs the mask images under ``out_root``."""
    from .geomcore import FootprintPolygon, GridFrame, LabelGrid, rasterize_polygon
    from .records import load_mask

    r = QualityReport()
    views = []
    units = record["unit_dict_list"]
    for u in units:
        dp = np.asarray(u["door_points"], dtype=float).reshape(-1, 3)
        views.append(unit_view(u["points"], u["adj"], u["room_type_dict"], [dp[4 * k : 4 * k + 4] for k in range(len(dp) // 4)], u.get("door_labels", [])))
    floor_units_report(views, r)
    r.record("RoomEnclosure", *building_loops_closed(record.array("final_building_adj"), record["final_room_type_dict"]))
    zs = sorted((u["z_base"], u["z_top"]) for u in units)
    contiguous = abs(zs[0][0]) <= EPS_MERGE and all(abs(a[1] - b[0]) <= EPS_MERGE for a, b in zip(zs[:-1], zs[1:]))
    r.record("FloorContiguity", contiguous, [] if contiguous else [(("floors",), "floor z ranges are not contiguous from 0")])
    if out_root is None:
        r.record("SemanticCoverage", True)
    else:
        for k, u in enumerate(units):
            try:
                mask = load_mask(out_root, u["floorplan_ID"])
                ox, oy, sc, w, h = u["grid_frame"]
                frame = GridFrame(ox, oy, sc, int(w), int(h))
                fp = rasterize_polygon(FootprintPolygon.from_points(u["footprint"]), sc, frame=frame)
                ok, diags = check_semantic_coverage(LabelGrid(mask, sc, (ox, oy)), fp)
            except (OSError, KeyError, ValueError) as e:
                ok, diags = False, [(("floor", k), f"cannot check coverage: {e}")]
            r.record("SemanticCoverage", ok, [(("floor", k, loc), msg) for loc, msg in diags])
    streams = {s: record.array(f"final_{s}_points") for s in ("building", "window", "door", "roof")}
    r.record("UniqueNodes", *check_unique_nodes(streams))
    return r
