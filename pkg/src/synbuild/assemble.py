"""Extrude aligned floor plans into 3D units, stack them under the roof, and
enumerate floor-plan stacking orders."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.spatial import cKDTree

from . import labels as L
from .align import transform_points
from .geomcore import (
    EPS_MERGE,
    GeometryError,
    WireframeGraph,
    adjacency_from_edges,
    congruent,
    edges_from_adjacency,
    loop_edges,
    merge_points,
)
from .seeding import derive_seed, stream
from .vectorize import VectorFloorPlan


class AssemblyError(GeometryError):
    pass


@dataclass(frozen=True)
class AssemblyConfig:
    window_band: tuple = (0.9, 2.1)  # sill, head above the floor
    door_height: float = 2.0
    front_door_height: float = 2.1
    snap_px: float = 2.0
    eps_merge: float = EPS_MERGE

    def validate(self):
        sill, head = self.window_band
        if not 0 <= sill < head:
            raise GeometryError("window_band needs 0 <= sill < head")
        if self.door_height <= 0 or self.front_door_height <= 0:
            raise GeometryError("door heights must be positive")
        return self


# ---------------------------------------------------------------------------
# plan preparation


def apply_alignment(plan, t, center, frame):
    """Move a plan (meters in ``frame``) by a pixel-space alignment transform."""
    px = frame.to_pixel(plan.nodes)
    moved = frame.to_world(transform_points(px, t, center))
    return VectorFloorPlan(moved, plan.adjacency, plan.rooms, plan.doors, plan.windows, dict(plan.meta))


def contract_plan(plan, mapping):
    """Merge plan nodes according to ``mapping`` (old index -> kept index)."""
    n = len(plan.nodes)
    target = np.array([mapping.get(i, i) for i in range(n)])
    keep = np.unique(target)
    new = np.full(n, -1, dtype=np.int64)
    new[keep] = np.arange(len(keep))
    idx = new[target]
    edges = {(min(idx[a], idx[b]), max(idx[a], idx[b])) for a, b in plan.edges() if idx[a] != idx[b]}
    rooms = []
    for loop, label in plan.rooms:
        lp = [int(idx[i]) for i in loop]
        lp = [v for k, v in enumerate(lp) if v != lp[k - 1]] if len(lp) > 1 else lp
        rooms.append((lp, label))
    doors = [((int(idx[a]), int(idx[b])), lab) for (a, b), lab in plan.doors if idx[a] != idx[b]]
    windows = [(int(idx[a]), int(idx[b])) for a, b in plan.windows if idx[a] != idx[b]]
    nodes = np.asarray(plan.nodes)[keep]
    return VectorFloorPlan(nodes, adjacency_from_edges(len(keep), edges), rooms, doors, windows, dict(plan.meta))


def snap_to_footprint(plan, footprint, tol):
    """Pull nodes near the footprint onto its vertices (first) or edges (second).

    Nodes that land on the same vertex are merged.
    """
    verts = footprint.array
    nodes = np.array(plan.nodes, dtype=float)
    opening = {i for (a, b), _ in plan.doors for i in (a, b)} | {i for w in plan.windows for i in w}
    owner = {}
    mapping = {}
    d, k = cKDTree(verts).query(nodes)
    for i in np.argsort(d, kind="stable"):
        if d[i] > tol or i in opening:
            continue
        v = int(k[i])
        if v in owner:
            mapping[int(i)] = owner[v]
        else:
            owner[v] = int(i)
            nodes[i] = verts[v]
    snapped = set(owner.values()) | set(mapping)
    edges = footprint.edges()
    for i in range(len(nodes)):
        if i in snapped:
            continue
        best = None
        for a, b in edges:
            a, b = np.asarray(a), np.asarray(b)
            ab = b - a
            t = float(np.clip((nodes[i] - a) @ ab / (ab @ ab), 0.0, 1.0))
            q = a + t * ab
            dist = float(np.hypot(*(nodes[i] - q)))
            if dist <= tol and (best is None or dist < best[0]):
                best = (dist, q)
        if best is not None:
            nodes[i] = best[1]
    out = VectorFloorPlan(nodes, plan.adjacency, plan.rooms, plan.doors, plan.windows, dict(plan.meta))
    return contract_plan(out, mapping) if mapping else out


# ---------------------------------------------------------------------------
# floor units


@dataclass(frozen=True)
class FloorUnit:
    points: np.ndarray  # (n, 3); the first len(plan nodes) rows are the floor ring
    adjacency: np.ndarray
    windows: tuple  # each a (4, 3) rectangle, corners in loop order
    doors: tuple  # (rectangle, label)
    rooms: tuple  # (loop of unit point indices, label)
    z_base: float
    z_top: float
    plan_id: str = ""
    footprint: tuple = ()

    @property
    def wireframe(self):
        return WireframeGraph(self.points, self.adjacency)

    @property
    def room_map(self):
        out = {}
        for loop, label in self.rooms:
            out.setdefault(label, []).append(list(loop))
        return out

    @property
    def window_segments(self):
        return [(w[0], w[1]) for w in self.windows]

    @property
    def door_segments(self):
        return [(d[0], d[1]) for d, _ in self.doors]


def _wall_edges(plan, structural):
    """Plan edges with chains through opening nodes collapsed (structural nodes only)."""
    nbrs = {i: set() for i in range(len(plan.nodes))}
    for a, b in plan.edges():
        nbrs[a].add(b)
        nbrs[b].add(a)
    out = set()
    for s in sorted(structural):
        for first in sorted(nbrs[s]):
            prev, cur = s, first
            seen = {s}
            while cur not in structural and cur not in seen:
                seen.add(cur)
                nxt = [n for n in nbrs[cur] if n != prev]
                if len(nxt) != 1:
                    break
                prev, cur = cur, nxt[0]
            if cur in structural and cur != s:
                out.add((min(s, cur), max(s, cur)))
    return out


def extrude_floor(plan, z_base, z_top, config=None, plan_id="", footprint=None):
    """Vertical extrusion of a plan already aligned in world meters."""
    cfg = (config or AssemblyConfig()).validate()
    if not z_top > z_base:
        raise AssemblyError(f"z_top {z_top} must exceed z_base {z_base}")
    height = z_top - z_base
    sill, head = cfg.window_band
    if head >= height or max(cfg.door_height, cfg.front_door_height) >= height:
        raise AssemblyError(f"openings do not fit in a {height:.2f} m storey")
    xy = np.asarray(plan.nodes, dtype=float)
    n = len(xy)
    opening = {i for (a, b), _ in plan.doors for i in (a, b)} | {i for w in plan.windows for i in w}
    structural = [i for i in range(n) if i not in opening]
    top_index = {s: n + k for k, s in enumerate(structural)}
    points = np.vstack([
        np.column_stack([xy, np.full(n, float(z_base))]),
        np.column_stack([xy[structural], np.full(len(structural), float(z_top))]),
    ])
    edges = set(plan.edges())
    edges |= {(top_index[a], top_index[b]) for a, b in _wall_edges(plan, set(structural))}
    edges |= {(s, top_index[s]) for s in structural}

    def rect(a, b, lo, hi):
        pa, pb = xy[a], xy[b]
        return np.array([[*pa, lo], [*pb, lo], [*pb, hi], [*pa, hi]], dtype=float)

    windows = tuple(rect(a, b, z_base + sill, z_base + head) for a, b in plan.windows)
    doors = tuple(
        (rect(a, b, float(z_base), z_base + (cfg.front_door_height if lab == L.FRONT_DOOR else cfg.door_height)), lab)
        for (a, b), lab in plan.doors
    )
    fp = tuple(map(tuple, footprint.array.tolist())) if footprint is not None else ()
    return FloorUnit(
        points, adjacency_from_edges(len(points), edges), windows, doors,
        tuple((tuple(loop), lab) for loop, lab in plan.rooms), float(z_base), float(z_top), plan_id, fp,
    )


# ---------------------------------------------------------------------------
# stacking


@dataclass(frozen=True)
class AssembledBuilding:
    points: np.ndarray
    adjacency: np.ndarray
    window_points: np.ndarray
    window_adj: np.ndarray
    door_points: np.ndarray
    door_adj: np.ndarray
    roof_points: np.ndarray
    roof_adj: np.ndarray
    room_type_dict: dict  # label -> list of building-index loops
    units: tuple
    plan_ids: tuple
    roof_loops: tuple = field(default=(), compare=False)
    z_levels: tuple = ()

    def streams(self):
        return {"building": self.points, "window": self.window_points, "door": self.door_points, "roof": self.roof_points}

    @property
    def wireframe(self):
        return WireframeGraph(self.points, self.adjacency)


def split_t_junctions(points, edges, eps=EPS_MERGE):
    """Split every edge at the nodes lying on its interior.

    Returns ``(edges, paths)`` where ``paths[(a, b)]`` is the node sequence
    replacing the original edge ``a -> b`` (both orientations present).
    """
    pts = np.asarray(points, dtype=float)
    tree = cKDTree(pts)
    out = set()
    paths = {}
    for a, b in edges:
        pa, pb = pts[a], pts[b]
        d = pb - pa
        length = float(np.linalg.norm(d))
        mid = (pa + pb) / 2
        cand = [c for c in tree.query_ball_point(mid, length / 2 + eps) if c != a and c != b]
        inner = []
        for c in cand:
            t = float((pts[c] - pa) @ d) / (length * length)
            if not 0 < t < 1:
                continue
            if np.linalg.norm(pa + t * d - pts[c]) <= eps:
                inner.append((t, c))
        seq = [a] + [c for _, c in sorted(inner)] + [b]
        for u, v in zip(seq[:-1], seq[1:]):
            out.add((min(u, v), max(u, v)))
        paths[(a, b)] = seq
        paths[(b, a)] = seq[::-1]
    return out, paths


def _expand_loop(loop, paths):
    out = []
    for a, b in loop_edges(loop):
        seq = paths.get((a, b), [a, b])
        out.extend(seq[:-1])
    return out


def _snap_stream(points, base, eps):
    """Replace stream points within ``eps`` of a base point by that exact point."""
    pts = np.array(points, dtype=float).reshape(-1, 3)
    if len(pts) and len(base):
        d, k = cKDTree(base).query(pts)
        close = d <= eps
        pts[close] = base[k[close]]
    return pts


def _rect_stream(rects, base, eps):
    pts = np.vstack(rects) if rects else np.zeros((0, 3))
    uniq, idx = merge_points(pts, eps)
    edges = set()
    for r in range(len(rects)):
        loop = [int(idx[4 * r + k]) for k in range(4)]
        for a, b in loop_edges(loop):
            if a != b:
                edges.add((min(a, b), max(a, b)))
    uniq = _snap_stream(uniq, base, eps)
    return uniq, adjacency_from_edges(len(uniq), edges)


def stack_floors(hull, units, eps=EPS_MERGE):
    """Merge floor units and the roof wireframe into one building."""
    if not units:
        raise AssemblyError("no floor units to stack")
    z = hull.z_levels
    if len(units) != hull.stories:
        raise AssemblyError(f"{len(units)} units for {hull.stories} storeys")
    for k, u in enumerate(units):
        if abs(u.z_base - z[k]) > eps or abs(u.z_top - z[k + 1]) > eps:
            raise AssemblyError(f"unit {k} spans z {u.z_base}..{u.z_top}, hull storey is {z[k]}..{z[k + 1]}")

    chunks, edges, offsets = [], [], []
    off = 0
    for u in units:
        offsets.append(off)
        chunks.append(u.points)
        edges.extend((a + off, b + off) for a, b in edges_from_adjacency(u.adjacency))
        off += len(u.points)
    roof_loops = [np.asarray(lp, dtype=float) for lp in hull.roof_loops()]
    roof_idx = []
    for lp in roof_loops:
        roof_idx.append(list(range(off, off + len(lp))))
        chunks.append(lp)
        off += len(lp)
    for loop in roof_idx:
        edges.extend(loop_edges(loop))

    pts, idx = merge_points(np.vstack(chunks), eps)
    merged = {(min(idx[a], idx[b]), max(idx[a], idx[b])) for a, b in edges if idx[a] != idx[b]}
    final_edges, paths = split_t_junctions(pts, sorted(merged), eps)
    adjacency = adjacency_from_edges(len(pts), final_edges)

    rooms = {}
    for u, o in zip(units, offsets):
        for loop, label in u.rooms:
            g = [int(idx[i + o]) for i in loop]
            rooms.setdefault(int(label), []).append(_expand_loop(g, paths))

    windows = [w for u in units for w in u.windows]
    doors = [d for u in units for d, _ in u.doors]
    window_points, window_adj = _rect_stream(windows, pts, eps)
    door_points, door_adj = _rect_stream(doors, pts, eps)

    # roof stream: its own points (shared exactly with the building), loop edges
    r_ids = sorted({int(idx[i]) for loop in roof_idx for i in loop})
    r_map = {g: k for k, g in enumerate(r_ids)}
    roof_points = pts[r_ids] if r_ids else np.zeros((0, 3))
    r_edges = set()
    for loop in roof_idx:
        g = [r_map[int(idx[i])] for i in loop]
        for a, b in loop_edges(g):
            if a != b:
                r_edges.add((min(a, b), max(a, b)))
    roof_adj = adjacency_from_edges(len(r_ids), r_edges)

    return AssembledBuilding(
        pts, adjacency, window_points, window_adj, door_points, door_adj, roof_points, roof_adj,
        {k: rooms[k] for k in sorted(rooms)}, tuple(units), tuple(u.plan_id for u in units),
        tuple(pts[[int(idx[i]) for i in loop]] for loop in roof_idx), tuple(z),
    )


def floor_contiguous(building, eps=EPS_MERGE):
    """Unit z ranges chain from 0 to the wall top without gaps."""
    zs = [(u.z_base, u.z_top) for u in sorted(building.units, key=lambda u: u.z_base)]
    if not zs or abs(zs[0][0]) > eps:
        return False
    return all(abs(a[1] - b[0]) <= eps for a, b in zip(zs[:-1], zs[1:]))


# ---------------------------------------------------------------------------
# stacking orders


@dataclass(frozen=True)
class StackingOrder:
    plan_ids: tuple  # index 0 is the lowest floor

    def __post_init__(self):
        object.__setattr__(self, "plan_ids", tuple(self.plan_ids))


def permutation_count(n, r):
    if r < 0 or n < 0:
        raise ValueError("n and r must be non-negative")
    if r > n:
        raise ValueError(f"cannot arrange {r} of {n}")
    return math.perm(n, r)


def stacking_count(n, r):
    """Orders of ``r`` floors from ``n`` plans under the reuse-once rule."""
    if n >= r:
        return permutation_count(n, r)
    repeats = r - n
    if repeats > n:
        return 0
    return math.comb(n, repeats) * math.factorial(r) // (2**repeats)


def _unrank_perm(rank, n, r):
    """The ``rank``-th r-permutation of range(n) in lexicographic order."""
    pool = list(range(n))
    out = []
    for k in range(r):
        block = math.perm(n - k - 1, r - k - 1)
        q, rank = divmod(rank, block)
        out.append(pool.pop(q))
    return out


def _reuse_sequences(n, r):
    """Lexicographic length-r sequences using every plan once or twice."""
    seqs = []
    counts = [0] * n
    seq = []

    def fill():
        if len(seq) == r:
            seqs.append(list(seq))
            return
        unused = counts.count(0)
        for k in range(n):
            if counts[k] == 2:
                continue
            # the slots left after this one must still fit every unused plan
            if r - len(seq) - 1 < unused - (counts[k] == 0):
                continue
            counts[k] += 1
            seq.append(k)
            fill()
            seq.pop()
            counts[k] -= 1

    fill()
    return seqs


class _ClassSpace:
    def __init__(self, n, r):
        self.n, self.r = n, r
        self.size = stacking_count(n, r)
        self._seqs = _reuse_sequences(n, r) if n < r else None

    def get(self, rank):
        if self._seqs is not None:
            return self._seqs[rank]
        return _unrank_perm(rank, self.n, self.r)


def floor_classes(footprints, eps=EPS_MERGE):
    """Class index per floor; congruent footprints share a class."""
    reps, out = [], []
    for fp in footprints:
        for k, rep in enumerate(reps):
            if congruent(fp, rep, eps):
                out.append(k)
                break
        else:
            reps.append(fp)
            out.append(len(reps) - 1)
    return out


def enumerate_stackings(plans_by_class, floors, cap=None, seed=0):
    """Distinct stacking orders.

    ``plans_by_class`` maps a floor class to its valid plan ids; ``floors`` is
    the class of every floor from the bottom up (an int means that many floors
    of the only class). When the top floor has a class of its own, its plan is
    drawn at random per order and only the lower floors are permuted.
    """
    if isinstance(floors, int):
        if len(plans_by_class) != 1:
            raise AssemblyError("an integer floor count needs exactly one floor class")
        floors = [next(iter(plans_by_class))] * floors
    floors = list(floors)
    if not floors:
        raise AssemblyError("no floors")
    for c in set(floors):
        if not plans_by_class.get(c):
            raise AssemblyError(f"no valid plans for floor class {c!r}")
    top_split = len(floors) > 1 and floors.count(floors[-1]) == 1
    lower = floors[:-1] if top_split else floors
    classes = sorted(set(lower), key=lower.index)
    slots = {c: [i for i, f in enumerate(lower) if f == c] for c in classes}
    spaces = [_ClassSpace(len(plans_by_class[c]), len(slots[c])) for c in classes]
    total = math.prod(s.size for s in spaces)
    if total == 0:
        raise AssemblyError("too few plans even with one reuse per plan")
    if cap is None or total <= cap:
        ranks = range(total)
    else:
        rng = stream(seed, "stackings")
        ranks = sorted(int(x) for x in rng.choice(total, size=int(cap), replace=False))
    orders = []
    for rank in ranks:
        ids = [None] * len(floors)
        rest = rank
        for c, sp in zip(reversed(classes), reversed(spaces)):
            rest, sub = divmod(rest, sp.size)
            for slot, k in zip(slots[c], sp.get(sub)):
                ids[slot] = plans_by_class[c][k]
        if top_split:
            top = plans_by_class[floors[-1]]
            ids[-1] = top[int(stream(derive_seed(seed, rank), "top_floor").integers(len(top)))]
        orders.append(StackingOrder(ids))
    return orders
