"""Building records: JSON schema, output tree, images and OBJ export.

Output tree::

    <root>/final_building_outdir/building_<exterior>/final_building_<hash12>.json
    <root>/deeplayout_visualization_outdir/<plan_id>.png   (RGB rendering)
    <root>/final_segmentation_outdir/<plan_id>.png         (8-bit label mask)

Images are stored with row 0 at the top (largest y), the usual orientation
for viewing; :func:`load_mask` flips them back onto the label grid.
"""

import hashlib
import json
import os
from pathlib import Path

import numpy as np
from PIL import Image

from . import labels as L

BUILDING_DIR = "final_building_outdir"
VIS_DIR = "deeplayout_visualization_outdir"
MASK_DIR = "final_segmentation_outdir"

FIELDS = (
    "final_building_points",
    "final_building_adj",
    "final_window_points",
    "final_window_adj",
    "final_door_points",
    "final_door_adj",
    "final_roof_points",
    "final_roof_adj",
    "final_room_type_dict",
    "unit_dict_list",
    "floorplan_ID_list",
    "sampled_roof_points_list",
)
STREAMS = (
    ("final_building_points", "final_building_adj"),
    ("final_window_points", "final_window_adj"),
    ("final_door_points", "final_door_adj"),
    ("final_roof_points", "final_roof_adj"),
)
UNIT_STREAMS = (("points", "adj"), ("window_points", "window_adj"), ("door_points", "door_adj"))


class RecordValidationError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


# ---------------------------------------------------------------------------
# canonical JSON values


def _num(x):
    v = round(float(x), 6)
    return 0.0 if v == 0 else v


def _points(a):
    return [[_num(v) for v in row] for row in np.asarray(a, dtype=float).reshape(-1, 3)]


def _adj(a):
    return np.asarray(a, dtype=np.uint8).tolist()


def _rect_adj(count):
    adj = np.zeros((4 * count, 4 * count), dtype=np.uint8)
    for r in range(count):
        for k in range(4):
            i, j = 4 * r + k, 4 * r + (k + 1) % 4
            adj[i, j] = adj[j, i] = 1
    return adj


def _room_dict(room_map):
    return {str(int(k)): [[int(i) for i in loop] for loop in loops] for k, loops in sorted(room_map.items())}


def unit_entry(k, unit, frame=None):
    """Per-floor wireframe. Window and door points come in groups of four corners
    (bottom edge first); ``door_labels`` gives the label of each group."""
    windows = np.vstack(unit.windows) if unit.windows else np.zeros((0, 3))
    doors = np.vstack([d for d, _ in unit.doors]) if unit.doors else np.zeros((0, 3))
    entry = {
        "floor_index": k,
        "floorplan_ID": unit.plan_id,
        "z_base": _num(unit.z_base),
        "z_top": _num(unit.z_top),
        "footprint": [[_num(x), _num(y)] for x, y in unit.footprint],
        "points": _points(unit.points),
        "adj": _adj(unit.adjacency),
        "window_points": _points(windows),
        "window_adj": _adj(_rect_adj(len(unit.windows))),
        "door_points": _points(doors),
        "door_adj": _adj(_rect_adj(len(unit.doors))),
        "door_labels": [int(lab) for _, lab in unit.doors],
        "room_type_dict": _room_dict(unit.room_map),
    }
    if frame is not None:
        entry["grid_frame"] = [_num(frame.origin_x), _num(frame.origin_y), _num(frame.scale), frame.width, frame.height]
    return entry


def build_record(building, roof_cloud, frames=None):
    """Plain-JSON record of an assembled building (floats already rounded)."""
    frames = frames or {}
    body = {
        "final_building_points": _points(building.points),
        "final_building_adj": _adj(building.adjacency),
        "final_window_points": _points(building.window_points),
        "final_window_adj": _adj(building.window_adj),
        "final_door_points": _points(building.door_points),
        "final_door_adj": _adj(building.door_adj),
        "final_roof_points": _points(building.roof_points),
        "final_roof_adj": _adj(building.roof_adj),
        "final_room_type_dict": _room_dict(building.room_type_dict),
        "unit_dict_list": [unit_entry(k, u, frames.get(u.plan_id)) for k, u in enumerate(building.units)],
        "floorplan_ID_list": list(building.plan_ids),
        "sampled_roof_points_list": _points(getattr(roof_cloud, "points", roof_cloud)),
    }
    return BuildingRecord(body)


def serialize(body):
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode()


# ---------------------------------------------------------------------------
# record type and validation


class BuildingRecord:
    """A validated record; ``record[field]`` gives the plain JSON value."""

    def __init__(self, body, validate=True):
        self.body = body
        if validate:
            validate_body(body)

    def __getitem__(self, key):
        return self.body[key]

    def __eq__(self, other):
        return isinstance(other, BuildingRecord) and serialize(self.body) == serialize(other.body)

    def array(self, key):
        v = self.body[key]
        if key.endswith("_adj"):
            return np.asarray(v, dtype=np.uint8).reshape(len(v), len(v))
        return np.asarray(v, dtype=float).reshape(-1, 3)

    def to_bytes(self):
        return serialize(self.body)

    def content_hash(self):
        return hashlib.sha256(self.to_bytes()).hexdigest()[:12]

    @property
    def floors(self):
        return len(self.body["floorplan_ID_list"])


def _check_stream(field_p, field_a, pts, adj):
    if not isinstance(pts, list) or any(not isinstance(p, list) or len(p) != 3 for p in pts):
        raise RecordValidationError(field_p, "expected a list of [x, y, z] points")
    n = len(pts)
    if not isinstance(adj, list) or len(adj) != n or any(not isinstance(r, list) or len(r) != n for r in adj):
        raise RecordValidationError(field_a, f"adjacency must be {n}x{n}")
    a = np.asarray(adj, dtype=float).reshape(n, n)
    if n and not np.isin(a, (0, 1)).all():
        raise RecordValidationError(field_a, "entries must be 0 or 1")
    if not np.array_equal(a, a.T):
        raise RecordValidationError(field_a, "adjacency is not symmetric")
    if n and np.diag(a).any():
        raise RecordValidationError(field_a, "adjacency has self loops")
    if n and not np.isfinite(np.asarray(pts, dtype=float)).all():
        raise RecordValidationError(field_p, "non-finite coordinates")


def _check_rooms(field, rooms, n, ids=L.ROOM_IDS):
    if not isinstance(rooms, dict):
        raise RecordValidationError(field, "expected a mapping of room id to loops")
    for key, loops in rooms.items():
        try:
            rid = int(key)
        except ValueError:
            raise RecordValidationError(field, f"room id {key!r} is not an integer") from None
        if rid not in ids:
            raise RecordValidationError(field, f"invalid room id {rid}")
        for loop in loops:
            if any(not (0 <= int(i) < n) for i in loop):
                raise RecordValidationError(field, f"room {rid} references a missing point")


def validate_body(body):
    if not isinstance(body, dict):
        raise RecordValidationError("record", "top level must be an object")
    for f in FIELDS:
        if f not in body:
            raise RecordValidationError(f, "missing field")
    for p, a in STREAMS:
        _check_stream(p, a, body[p], body[a])
    _check_rooms("final_room_type_dict", body["final_room_type_dict"], len(body["final_building_points"]))
    ids = body["floorplan_ID_list"]
    if not isinstance(ids, list) or not ids or not all(isinstance(i, str) for i in ids):
        raise RecordValidationError("floorplan_ID_list", "expected a non-empty list of ids")
    units = body["unit_dict_list"]
    if not isinstance(units, list) or len(units) != len(ids):
        raise RecordValidationError("unit_dict_list", f"expected {len(ids)} floor entries")
    for k, u in enumerate(units):
        where = f"unit_dict_list[{k}]"
        if not isinstance(u, dict):
            raise RecordValidationError(where, "expected an object")
        for p, a in UNIT_STREAMS:
            if p not in u or a not in u:
                raise RecordValidationError(f"{where}.{p}", "missing field")
            _check_stream(f"{where}.{p}", f"{where}.{a}", u[p], u[a])
        _check_rooms(f"{where}.room_type_dict", u.get("room_type_dict"), len(u["points"]))
        if u.get("floorplan_ID") != ids[k]:
            raise RecordValidationError(f"{where}.floorplan_ID", "does not match floorplan_ID_list")
    cloud = body["sampled_roof_points_list"]
    if not isinstance(cloud, list) or any(not isinstance(p, list) or len(p) != 3 for p in cloud):
        raise RecordValidationError("sampled_roof_points_list", "expected a list of [x, y, z] points")
    return body


# ---------------------------------------------------------------------------
# files


def emit_record(record, out_root, exterior_id):
    """Write ``record`` under its content-hash name; returns the path."""
    validate_body(record.body)
    data = record.to_bytes()
    name = hashlib.sha256(data).hexdigest()[:12]
    folder = Path(out_root) / BUILDING_DIR / f"building_{exterior_id}"
    folder.mkdir(parents=True, exist_ok=True)
    path = folder / f"final_building_{name}.json"
    tmp = path.with_suffix(f".tmp{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)
    return path


def load_record(path):
    path = Path(path)
    try:
        body = json.loads(path.read_bytes())
    except json.JSONDecodeError as e:
        raise RecordValidationError("record", f"{path}: invalid JSON ({e})") from None
    return BuildingRecord(body)


def find_records(root):
    root = Path(root)
    base = root / BUILDING_DIR if (root / BUILDING_DIR).is_dir() else root
    return sorted(base.rglob("final_building_*.json"))


def exterior_of(path):
    return Path(path).parent.name


def render_labels(labels):
    rgb = np.zeros(labels.shape + (3,), dtype=np.uint8)
    for k, color in L.PALETTE.items():
        rgb[labels == k] = color
    return rgb


def write_plan_images(out_root, plan_id, labels):
    root = Path(out_root)
    (root / VIS_DIR).mkdir(parents=True, exist_ok=True)
    (root / MASK_DIR).mkdir(parents=True, exist_ok=True)
    lab = np.asarray(labels, dtype=np.uint8)
    Image.fromarray(np.flipud(render_labels(lab))).save(root / VIS_DIR / f"{plan_id}.png", optimize=False)
    Image.fromarray(np.flipud(lab), mode="L").save(root / MASK_DIR / f"{plan_id}.png", optimize=False)


def load_mask(out_root, plan_id):
    path = Path(out_root) / MASK_DIR / f"{plan_id}.png"
    return np.flipud(np.asarray(Image.open(path))).astype(np.int64)


# ---------------------------------------------------------------------------
# OBJ


def export_obj(record, streams=("building", "window", "door", "roof")):
    """Wireframe as OBJ line elements, one named group per stream."""
    names = {
        "building": STREAMS[0],
        "window": STREAMS[1],
        "door": STREAMS[2],
        "roof": STREAMS[3],
    }
    lines = ["# wireframe export; units are meters"]
    offset = 0
    for s in streams:
        pf, af = names[s]
        pts = record[pf]
        if not pts:
            continue
        lines.append(f"o {s}")
        lines.append(f"g {s}")
        lines.extend(f"v {x:.6f} {y:.6f} {z:.6f}" for x, y, z in pts)
        adj = np.asarray(record[af], dtype=np.uint8)
        a, b = np.nonzero(np.triu(adj, 1))
        lines.extend(f"l {i + 1 + offset} {j + 1 + offset}" for i, j in zip(a.tolist(), b.tolist()))
        offset += len(pts)
    return "\n".join(lines) + "\n"


def parse_obj(text):
    """(vertices, lines, groups) from OBJ text written by :func:`export_obj`."""
    verts, edges, groups = [], [], []
    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(v) for v in parts[1:4]])
        elif parts[0] == "l":
            edges.append(tuple(int(v) - 1 for v in parts[1:]))
        elif parts[0] == "g":
            groups.append(parts[1])
    return np.asarray(verts).reshape(-1, 3), edges, groups
