"""Footprint-conditioned floor-plan generation.

:func:`generate_floorplan` is a procedural stand-in for a learned layout
model: it partitions the footprint by recursive straight cuts, assigns room
types, connects rooms with a door spanning tree rooted at the front door,
adds windows and rasterizes everything into a :class:`LabelGrid`. Anything
with the same signature can replace it.
"""

from dataclasses import dataclass, field
import hashlib
import math

import numpy as np
from scipy import ndimage
import shapely.geometry as sg
from shapely.ops import split

from . import kernels
from . import labels as L
from .geomcore import FootprintPolygon, GeometryError, LabelGrid, auto_frame, drop_collinear
from .seeding import derive_seed, stream

# Sampling weights for non-living rooms (observed shares in the reference dataset).
DEFAULT_ROOM_WEIGHTS = {
    L.KITCHEN: 19.45,
    L.BATHROOM: 18.31,
    L.MASTER_ROOM: 15.88,
    L.SECOND_ROOM: 14.64,
    L.BALCONY: 9.56,
    L.STUDY_ROOM: 0.79,
}


class FloorplanError(GeometryError):
    """The generator could not produce a valid layout."""


@dataclass(frozen=True)
class FloorplanConfig:
    grid_size: int = 256
    margin_px: int = 8
    wall_px: float = 3.0
    door_width_m: float = 0.9
    front_door_width_m: float = 1.0
    window_width_m: tuple = (0.9, 1.6)
    room_area_m2: float = 16.0
    min_rooms: int = 3
    max_rooms: int = 7
    min_room_width_m: float = 2.0
    min_wall_m: float = 0.8
    room_weights: dict = field(default_factory=lambda: dict(DEFAULT_ROOM_WEIGHTS))
    p_second_window: float = 0.4
    max_retries: int = 6

    def validate(self):
        if self.grid_size < 32 or self.margin_px < 0 or 2 * self.margin_px >= self.grid_size:
            raise GeometryError("invalid grid_size/margin_px")
        if self.wall_px <= 0:
            raise GeometryError("wall_px must be positive")
        if not 3 <= self.min_rooms <= self.max_rooms:
            raise GeometryError("room count range must start at 3 or more")
        for k in self.room_weights:
            if k not in L.ROOM_IDS or k == L.LIVING_ROOM:
                raise GeometryError(f"room weight for invalid id {k}")
        return self


@dataclass(frozen=True)
class FrontDoorPlacement:
    boundary_edge_index: int
    offset_along_edge: float
    width: float

    def segment(self, footprint, margin=0.3):
        a, b = footprint.edges()[self.boundary_edge_index]
        a, b = np.asarray(a), np.asarray(b)
        length = float(np.hypot(*(b - a)))
        if length < self.width:
            raise GeometryError("door wider than its edge")
        m = min(margin, (length - self.width) / 2.0)
        start = m + self.offset_along_edge * (length - self.width - 2 * m)
        t = (b - a) / length
        return a + t * start, a + t * (start + self.width)


@dataclass(frozen=True)
class Opening:
    kind: int  # label id
    a: tuple
    b: tuple
    rooms: tuple  # indices of the rooms the opening joins (one for exterior openings)


@dataclass(frozen=True)
class FloorPlanCandidate:
    id: str
    footprint_ref: FootprintPolygon
    door: FrontDoorPlacement
    grid: LabelGrid
    seed: int
    rooms: tuple = ()  # (vertices in meters, label) from the generator
    openings: tuple = ()


def place_front_door(footprint, seed, width=0.9):
    """Uniform random edge (among those long enough) and offset for the front door."""
    edges = footprint.edges()
    eligible = [i for i, (a, b) in enumerate(edges) if math.dist(a, b) >= width]
    if not eligible:
        raise GeometryError(f"no footprint edge is at least {width} m long")
    rng = stream(seed, "front_door")
    edge = eligible[int(rng.integers(len(eligible)))]
    return FrontDoorPlacement(edge, float(rng.random()), float(width))


# ---------------------------------------------------------------------------
# partitioning


def _edge_angles(poly):
    ring = list(poly.exterior.coords)
    out = []
    for p, q in zip(ring[:-1], ring[1:]):
        ang = math.atan2(q[1] - p[1], q[0] - p[0]) % math.pi
        out.append((ang, math.dist(p, q)))
    return out


def _cut_directions(region, rng):
    dirs = [0.0, math.pi / 2]
    for ang, length in _edge_angles(region):
        axis = min(abs(ang - 0), abs(ang - math.pi / 2), abs(ang - math.pi))
        if axis > math.radians(5) and length >= 1.5:
            dirs.append(ang)
    rng.shuffle(dirs)
    return dirs


def _extent(region, direction):
    nx, ny = -math.sin(direction), math.cos(direction)
    proj = [x * nx + y * ny for x, y in region.exterior.coords]
    return min(proj), max(proj), (nx, ny)


def _min_edge(poly):
    c = list(poly.exterior.coords)
    return min(math.dist(p, q) for p, q in zip(c[:-1], c[1:]))


def _clean(poly):
    pts = drop_collinear(list(poly.exterior.coords)[:-1])
    return sg.Polygon(pts)


def _try_split(region, direction, frac, cfg, corners):
    lo, hi, (nx, ny) = _extent(region, direction)
    if hi - lo < 2 * cfg.min_room_width_m:
        return None
    d = lo + frac * (hi - lo)
    tx, ty = math.cos(direction), math.sin(direction)
    big = 1e3
    cx, cy = nx * d, ny * d
    line = sg.LineString([(cx - tx * big, cy - ty * big), (cx + tx * big, cy + ty * big)])
    parts = split(region, line)
    polys = [g for g in parts.geoms if isinstance(g, sg.Polygon)]
    if len(polys) != 2:
        return None
    polys = [_clean(p) for p in polys]
    for p in polys:
        if not p.is_valid or p.area < cfg.min_room_width_m**2:
            return None
        if p.buffer(-cfg.min_room_width_m / 2.0, join_style=2).is_empty:
            return None
        if _min_edge(p) < cfg.min_wall_m:
            return None
    # new cut endpoints must stay clear of existing corners
    cut = polys[0].intersection(polys[1])
    ends = []
    for g in getattr(cut, "geoms", [cut]):
        if hasattr(g, "coords"):
            ends.extend(list(g.coords))
    for e in ends:
        for c in corners:
            if 1e-9 < math.dist(e, c) < cfg.min_wall_m:
                return None
    return polys


def partition(footprint, n_rooms, rng, cfg):
    regions = [footprint.to_shapely()]
    corners = list(footprint.vertices)
    while len(regions) < n_rooms:
        order = sorted(range(len(regions)), key=lambda i: -regions[i].area)
        done = False
        for i in order:
            region = regions[i]
            for direction in _cut_directions(region, rng):
                for _ in range(3):
                    polys = _try_split(region, direction, float(rng.uniform(0.35, 0.65)), cfg, corners)
                    if polys:
                        regions[i : i + 1] = polys
                        for p in polys:
                            corners.extend(list(p.exterior.coords)[:-1])
                        done = True
                        break
                if done:
                    break
            if done:
                break
        if not done:
            break
    return regions


# ---------------------------------------------------------------------------
# openings


def _segments(poly):
    c = list(poly.exterior.coords)
    return [(np.array(p), np.array(q)) for p, q in zip(c[:-1], c[1:])]


def _on_boundary(fp_boundary, a, b):
    mid = sg.Point((a + b) / 2.0)
    return fp_boundary.distance(mid) < 1e-6 and fp_boundary.distance(sg.Point(a)) < 1e-6 and fp_boundary.distance(
        sg.Point(b)
    ) < 1e-6


def _shared_segments(pa, pb):
    inter = pa.intersection(pb)
    out = []
    for g in getattr(inter, "geoms", [inter]):
        if isinstance(g, sg.LineString):
            c = list(g.coords)
            out.extend((np.array(p), np.array(q)) for p, q in zip(c[:-1], c[1:]))
    return out


def _frontage(room, fp_boundary, rooms):
    """Room edges on the footprint boundary, split at neighbouring junctions."""
    segs = []
    for a, b in _segments(room):
        if _on_boundary(fp_boundary, a, b):
            segs.append((a, b))
    return segs


def _fit_interval(a, b, width, margin, rng, avoid=()):
    length = float(np.hypot(*(b - a)))
    free = length - width - 2 * margin
    if free < 0:
        return None
    t = (b - a) / length
    for _ in range(6):
        s = margin + rng.uniform(0.0, free)
        p, q = a + t * s, a + t * (s + width)
        clash = False
        for u, v in avoid:
            # both on the same line: compare intervals
            su = float((u - a) @ t)
            sv = float((v - a) @ t)
            off = abs(float(t[0] * (u[1] - a[1]) - t[1] * (u[0] - a[0])))
            if off < 1e-6 and max(su, sv) > s - margin and min(su, sv) < s + width + margin:
                clash = True
        if not clash:
            return p, q
    return None


# ---------------------------------------------------------------------------
# rasterization


def _paint_segment(labels, dist_reach, frame, a, b, label, allowed, half):
    pa = frame.to_pixel(a)
    pb = frame.to_pixel(b)
    d = kernels.segment_distance_field(labels.shape, [[*pa, *pb]], dist_reach)
    rr, cc = np.nonzero(d < half)
    if rr.size == 0:
        return 0
    # keep pixels whose projection falls inside the opening, not the end caps
    v = pb - pa
    ll = float(v @ v)
    t = ((cc + 0.5 - pa[0]) * v[0] + (rr + 0.5 - pa[1]) * v[1]) / ll
    keep = (t >= 0.0) & (t <= 1.0) & np.isin(labels[rr, cc], list(allowed))
    labels[rr[keep], cc[keep]] = label
    return int(keep.sum())


def rasterize_layout(footprint, rooms, openings, frame, wall_px):
    """Label grid for room polygons (meters) and openings on the walls."""
    h, w = frame.shape
    labels = np.full((h, w), L.EXTERNAL, dtype=np.uint8)
    xs, ys = frame.pixel_centers()
    fpv = footprint.array
    inside = kernels.points_in_polygon(xs.ravel(), ys.ravel(), fpv[:, 0], fpv[:, 1]).reshape(h, w)
    assigned = np.zeros((h, w), dtype=bool)
    for verts, label in rooms:
        v = np.asarray(verts, dtype=float)
        m = kernels.points_in_polygon(xs.ravel(), ys.ravel(), v[:, 0], v[:, 1]).reshape(h, w)
        m &= inside & ~assigned
        labels[m] = label
        assigned |= m
    gap = inside & ~assigned
    if gap.any():
        # numerical slivers between room polygons: nearest assigned pixel wins
        _, (ri, ci) = ndimage.distance_transform_edt(~assigned, return_indices=True)
        labels[gap] = labels[ri[gap], ci[gap]]

    half = wall_px / 2.0
    fp_segs = [[*frame.to_pixel(a), *frame.to_pixel(b)] for a, b in footprint.edges()]
    interior = []
    fp_boundary = footprint.to_shapely().exterior
    for verts, _ in rooms:
        poly = sg.Polygon(verts)
        for a, b in _segments(poly):
            if not _on_boundary(fp_boundary, a, b):
                interior.append([*frame.to_pixel(a), *frame.to_pixel(b)])
    if interior:
        d_in = kernels.segment_distance_field((h, w), interior, wall_px + 2)
        labels[d_in < half] = L.INTERIOR_WALL
    d_ext = kernels.segment_distance_field((h, w), fp_segs, wall_px + 2)
    labels[d_ext < half] = L.EXTERIOR_WALL

    for op in openings:
        allowed = (L.EXTERIOR_WALL,) if op.kind in (L.WINDOW, L.FRONT_DOOR) else (L.INTERIOR_WALL, L.EXTERIOR_WALL)
        if op.kind == L.BALCONY_DOOR or op.kind == L.INTERIOR_DOOR:
            allowed = (L.INTERIOR_WALL,)
        _paint_segment(labels, wall_px + 2, frame, np.asarray(op.a), np.asarray(op.b), op.kind, allowed, half)
    return labels


# ---------------------------------------------------------------------------
# generator


def _choose_types(n, tree_children, frontage_ok, rng, weights):
    ids = sorted(weights)
    p = np.array([weights[k] for k in ids], dtype=float)
    p /= p.sum()
    types = [L.LIVING_ROOM] + [0] * (n - 1)
    for i in range(1, n):
        for _ in range(20):
            t = int(ids[int(rng.choice(len(ids), p=p))])
            if t == L.BALCONY and (tree_children[i] or not frontage_ok[i]):
                continue
            break
        else:
            t = L.SECOND_ROOM
        types[i] = t
    return types


def _layout(footprint, door, seed, cfg, frame):
    rng = stream(seed, "layout")
    fp_shape = footprint.to_shapely()
    area = fp_shape.area
    n_target = int(np.clip(round(area / cfg.room_area_m2) + rng.integers(-1, 2), cfg.min_rooms, cfg.max_rooms))
    regions = partition(footprint, n_target, rng, cfg)
    if len(regions) < cfg.min_rooms:
        raise FloorplanError(f"partition produced only {len(regions)} rooms")

    fd_a, fd_b = door.segment(footprint)
    fd_mid = sg.Point((fd_a + fd_b) / 2.0)
    dists = [r.exterior.distance(fd_mid) for r in regions]
    root = int(np.argmin(dists))
    if dists[root] > 1e-6:
        raise FloorplanError("front door does not touch any room")
    # the door segment must lie within one room's frontage
    if not regions[root].exterior.buffer(1e-6).contains(sg.LineString([fd_a, fd_b])):
        raise FloorplanError("front door straddles two rooms")
    clear = (cfg.wall_px + 2.5) * frame.scale
    door_line = sg.LineString([fd_a, fd_b])
    for i, r in enumerate(regions):
        if i != root and r.distance(door_line) < clear:
            raise FloorplanError("front door too close to an interior wall")
    order = [root] + [i for i in range(len(regions)) if i != root]
    regions = [regions[i] for i in order]

    margin = (cfg.wall_px + 2.5) * frame.scale
    n = len(regions)
    door_spots = {}
    for i in range(n):
        for j in range(i + 1, n):
            best = None
            for a, b in _shared_segments(regions[i], regions[j]):
                length = float(np.hypot(*(b - a)))
                if length >= cfg.door_width_m + 2 * margin and (best is None or length > best[2]):
                    best = (a, b, length)
            if best:
                door_spots[(i, j)] = best

    parent = {0: None}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            nbrs = [v for v in range(n) if v not in parent and (min(u, v), max(u, v)) in door_spots]
            rng.shuffle(nbrs)
            for v in nbrs:
                parent[v] = u
                nxt.append(v)
        frontier = nxt
    if len(parent) != n:
        raise FloorplanError("some rooms cannot be reached through a door")
    children = {i: [v for v, p in parent.items() if p == i] for i in range(n)}

    fp_boundary = fp_shape.exterior
    frontage = [_frontage(r, fp_boundary, regions) for r in regions]
    win_min = cfg.window_width_m[0] + 2 * margin
    frontage_ok = [any(np.hypot(*(b - a)) >= win_min for a, b in f) for f in frontage]
    types = _choose_types(n, children, frontage_ok, rng, cfg.room_weights)

    openings = [Opening(L.FRONT_DOOR, tuple(fd_a), tuple(fd_b), (0,))]
    for v in range(1, n):
        u = parent[v]
        a, b, length = door_spots[(min(u, v), max(u, v))]
        t = (b - a) / length
        s = margin + rng.uniform(0.0, length - cfg.door_width_m - 2 * margin)
        kind = L.BALCONY_DOOR if L.BALCONY in (types[u], types[v]) else L.INTERIOR_DOOR
        openings.append(Opening(kind, tuple(a + t * s), tuple(a + t * (s + cfg.door_width_m)), (u, v)))

    taken = [(np.asarray(fd_a), np.asarray(fd_b))]
    for i in range(n):
        segs = sorted(frontage[i], key=lambda s: -float(np.hypot(*(s[1] - s[0]))))
        want = 1 + int(rng.random() < cfg.p_second_window)
        for a, b in segs[:want]:
            width = float(rng.uniform(*cfg.window_width_m))
            spot = _fit_interval(a, b, width, margin, rng, taken)
            if spot is None:
                width = cfg.window_width_m[0]
                spot = _fit_interval(a, b, width, margin, rng, taken)
            if spot is not None:
                openings.append(Opening(L.WINDOW, tuple(spot[0]), tuple(spot[1]), (i,)))
                taken.append(spot)

    rooms = [(tuple(map(tuple, list(r.exterior.coords)[:-1])), types[i]) for i, r in enumerate(regions)]
    return rooms, openings


def grid_hash(grid):
    return hashlib.blake2b(np.ascontiguousarray(grid.labels).tobytes(), digest_size=8).hexdigest()


def generate_floorplan(footprint, door, seed, config=None, candidate_id=None):
    """Label grid for one floor, conditioned on its footprint and front door."""
    cfg = (config or FloorplanConfig()).validate()
    frame = auto_frame(footprint, cfg.grid_size, cfg.margin_px)
    last = None
    for attempt in range(cfg.max_retries):
        sub = seed if attempt == 0 else derive_seed(seed, "floorplan.retry", attempt)
        try:
            rooms, openings = _layout(footprint, door, sub, cfg, frame)
        except (FloorplanError, GeometryError) as exc:
            last = exc
            continue
        labels = rasterize_layout(footprint, rooms, openings, frame, cfg.wall_px)
        fd = ndimage.label(labels == L.FRONT_DOOR)[1]
        if fd != 1:
            last = FloorplanError(f"front door has {fd} components")
            continue
        grid = LabelGrid(labels, frame.scale, (frame.origin_x, frame.origin_y))
        cid = candidate_id or f"fp_{grid_hash(grid)}"
        return FloorPlanCandidate(cid, footprint, door, grid, int(seed), tuple(rooms), tuple(openings))
    raise FloorplanError(f"layout generation failed after {cfg.max_retries} attempts: {last}")
