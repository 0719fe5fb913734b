"""Dataset statistics over building records.

Per-record numbers are computed independently and folded into a
:class:`DatasetSummary` with an associative ``merge``, so record sets can be
summarized in parallel chunks.
"""

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import labels as L
from .records import exterior_of, load_record

# buildings-per-exterior bands; the last one is closed at the largest count expected
BUCKETS = ((1, 4), (5, 9), (10, 99), (100, 999), (1000, 9999), (10000, 17160))
OVERFLOW = "other"


def graph_stats(record):
    """(nodes, edges, floors) of the building wireframe."""
    adj = np.asarray(record["final_building_adj"], dtype=np.int64)
    n = len(record["final_building_points"])
    edges = int(adj.sum()) // 2 if n else 0
    return n, edges, len(record["floorplan_ID_list"])


@dataclass
class RecordStats:
    path: str
    exterior: str
    nodes: int
    edges: int
    floors: int
    rooms: dict  # room id -> loop count
    doors: int
    windows: int

    @property
    def elements(self):
        return sum(self.rooms.values()) + self.doors + self.windows


def record_stats(record, path="", exterior=""):
    n, e, f = graph_stats(record)
    rooms = {int(k): len(v) for k, v in record["final_room_type_dict"].items()}
    units = record["unit_dict_list"]
    doors = sum(len(u["door_points"]) // 4 for u in units)
    windows = sum(len(u["window_points"]) // 4 for u in units)
    return RecordStats(str(path), exterior, n, e, f, rooms, doors, windows)


def _bucket(count, buckets):
    for lo, hi in buckets:
        if lo <= count <= hi:
            return f"{lo}-{hi}"
    return OVERFLOW


@dataclass
class DatasetSummary:
    buildings: int = 0
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    floors: list = field(default_factory=list)
    room_counts: Counter = field(default_factory=Counter)
    doors: int = 0
    windows: int = 0
    per_exterior: Counter = field(default_factory=Counter)

    def add(self, rs):
        self.buildings += 1
        self.nodes.append(rs.nodes)
        self.edges.append(rs.edges)
        self.floors.append(rs.floors)
        self.room_counts.update(rs.rooms)
        self.doors += rs.doors
        self.windows += rs.windows
        self.per_exterior[rs.exterior] += 1
        return self

    def merge(self, other):
        out = DatasetSummary()
        out.buildings = self.buildings + other.buildings
        out.nodes = self.nodes + other.nodes
        out.edges = self.edges + other.edges
        out.floors = self.floors + other.floors
        out.room_counts = self.room_counts + other.room_counts
        out.doors = self.doors + other.doors
        out.windows = self.windows + other.windows
        out.per_exterior = self.per_exterior + other.per_exterior
        return out

    @property
    def rooms(self):
        return sum(self.room_counts.values())

    @property
    def labeled_elements(self):
        return self.rooms + self.doors + self.windows

    def room_shares(self):
        total = self.rooms
        return {k: self.room_counts[k] / total for k in sorted(self.room_counts)} if total else {}

    def histogram(self, buckets=BUCKETS):
        """Per band: number of exteriors and the buildings they contribute."""
        bands = {f"{lo}-{hi}": [0, 0] for lo, hi in buckets}
        for count in self.per_exterior.values():
            b = bands.setdefault(_bucket(count, buckets), [0, 0])
            b[0] += 1
            b[1] += count
        return [{"band": k, "exteriors": v[0], "buildings": v[1]} for k, v in bands.items()]

    def to_dict(self, buckets=BUCKETS):
        def describe(xs):
            if not xs:
                return {"min": 0, "max": 0, "median": 0.0, "mean": 0.0, "std": 0.0}
            a = np.asarray(xs, dtype=float)
            return {"min": int(a.min()), "max": int(a.max()), "median": float(np.median(a)),
                    "mean": round(float(a.mean()), 6), "std": round(float(a.std()), 6)}

        return {
            "buildings": self.buildings,
            "exteriors": len(self.per_exterior),
            "nodes": describe(self.nodes),
            "edges": describe(self.edges),
            "floors": describe(self.floors),
            "floor_counts": {str(k): v for k, v in sorted(Counter(self.floors).items())},
            "room_counts": {str(k): self.room_counts[k] for k in sorted(self.room_counts)},
            "room_shares": {str(k): v for k, v in self.room_shares().items()},
            "room_names": {str(k): L.NAMES.get(k, "?") for k in sorted(self.room_counts)},
            "rooms": self.rooms,
            "doors": self.doors,
            "windows": self.windows,
            "labeled_elements": self.labeled_elements,
            "buildings_per_exterior": self.histogram(buckets),
        }

    def to_json(self, buckets=BUCKETS):
        return json.dumps(self.to_dict(buckets), indent=2, sort_keys=True)


def dataset_summary(records, exteriors=None):
    """Summary of in-memory records; ``exteriors`` gives the group of each one."""
    out = DatasetSummary()
    for k, rec in enumerate(records):
        ext = exteriors[k] if exteriors is not None else ""
        out.add(record_stats(rec, exterior=ext))
    return out


def _path_stats(path):
    return record_stats(load_record(path), path, exterior_of(path))


def summarize_paths(paths, workers=1):
    """Per-record stats for files on disk, plus the folded summary."""
    paths = [str(p) for p in paths]
    if workers > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_path_stats, paths, chunksize=16))
    else:
        rows = [_path_stats(p) for p in paths]
    summary = DatasetSummary()
    for r in rows:
        summary.add(r)
    return rows, summary


CSV_COLUMNS = ("path", "exterior", "nodes", "edges", "floors", "rooms", "doors", "windows", "elements")


def to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.path, r.exterior, r.nodes, r.edges, r.floors, sum(r.rooms.values()), r.doors, r.windows,
                    r.elements])
    return buf.getvalue()
