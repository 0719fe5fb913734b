"""Randomized building exteriors: footprints, walls, roofs and roof superstructures.

A hull is assembled from planar face loops. Coincident points are merged and
T-junctions are split so that every edge is shared by exactly two faces.
"""

from dataclasses import dataclass, field, replace
import enum
import math

import numpy as np
import shapely.geometry as sg
from shapely.ops import unary_union

from .geomcore import (
    EPS_MERGE,
    FootprintPolygon,
    GeometryError,
    WireframeGraph,
    adjacency_from_edges,
    is_watertight,
    loop_edges,
    merge_points,
    rectangle,
)
from .seeding import derive_seed, stream


class RoofKind(str, enum.Enum):
    FLAT = "flat"
    GABLED = "gabled"
    HIPPED = "hipped"
    PYRAMIDAL = "pyramidal"
    SHED = "shed"


class ExtensionKind(str, enum.Enum):
    RECTANGULAR = "rectangular"
    TRAPEZOIDAL = "trapezoidal"


MAX_EXTENSIONS = 4


@dataclass(frozen=True)
class Extension:
    kind: ExtensionKind
    width: float
    depth: float
    # Plan angle of the oblique sides of a trapezoid, measured from the edge normal.
    taper_deg: float = 0.0


@dataclass(frozen=True)
class Superstructure:
    kind: str  # "dormer" | "chimney" | "roof_window"
    face: str
    center_u: float  # fractions of the roof face's extent
    center_w: float
    size_u: float  # meters
    size_w: float
    height: float = 1.0


@dataclass(frozen=True)
class RoofBlock:
    """Axis-aligned rectangle carrying its own roof."""

    x0: float
    y0: float
    x1: float
    y1: float
    kind: RoofKind
    rise: float

    def polygon(self):
        return rectangle(self.x0, self.y0, self.x1 - self.x0, self.y1 - self.y0)

    def shifted(self, dx, dy):
        return replace(self, x0=self.x0 + dx, x1=self.x1 + dx, y0=self.y0 + dy, y1=self.y1 + dy)


@dataclass(frozen=True)
class ExteriorSpec:
    base_width: float
    base_depth: float
    stories: int
    floor_height: float = 3.0
    roof: RoofKind = RoofKind.FLAT
    roof_rise: float = 2.0
    superstructures: tuple = ()
    merge_partner: "ExteriorSpec" = None
    merge_side: int = 1  # 0 south, 1 east, 2 north, 3 west
    merge_offset: float = 0.0
    extensions: tuple = ()
    setback_top: bool = False

    def __post_init__(self):
        if self.stories < 1:
            raise GeometryError("stories must be >= 1")
        if len(self.extensions) > MAX_EXTENSIONS:
            raise GeometryError(f"at most {MAX_EXTENSIONS} extensions, got {len(self.extensions)}")
        if self.base_width <= 0 or self.base_depth <= 0 or self.floor_height <= 0:
            raise GeometryError("dimensions must be positive")


@dataclass(frozen=True)
class ExteriorConfig:
    stories_range: tuple = (1, 4)
    base_width_range_m: tuple = (8.0, 16.0)
    base_depth_range_m: tuple = (7.0, 12.0)
    floor_height_m: float = 3.0
    roof_rise_range_m: tuple = (1.0, 3.0)
    roof_kinds_enabled: tuple = tuple(k.value for k in RoofKind)
    p_merge: float = 0.25
    p_extension: float = 0.5
    max_extensions: int = MAX_EXTENSIONS
    p_setback: float = 0.3
    p_dormer: float = 0.3
    p_chimney: float = 0.4
    p_roof_window: float = 0.3

    def validate(self):
        lo, hi = self.stories_range
        if not (1 <= lo <= hi):
            raise GeometryError(f"invalid stories_range {self.stories_range}")
        for name in ("base_width_range_m", "base_depth_range_m", "roof_rise_range_m"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise GeometryError(f"invalid {name} {getattr(self, name)}")
        if not self.roof_kinds_enabled:
            raise GeometryError("roof_kinds_enabled is empty")
        for k in self.roof_kinds_enabled:
            RoofKind(k)
        if not 0 <= self.max_extensions <= MAX_EXTENSIONS:
            raise GeometryError(f"max_extensions must be within 0..{MAX_EXTENSIONS}")
        for name in ("p_merge", "p_extension", "p_setback", "p_dormer", "p_chimney", "p_roof_window"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise GeometryError(f"{name} must be a probability")
        if self.floor_height_m <= 0:
            raise GeometryError("floor_height_m must be positive")
        return self


@dataclass(frozen=True)
class BuildingHull:
    wireframe: WireframeGraph
    roof_faces: tuple
    floor_footprints: tuple
    floor_heights: tuple
    blocks: tuple = ()
    roof_windows: tuple = ()
    superstructures: tuple = field(default=())

    @property
    def stories(self):
        return len(self.floor_footprints)

    @property
    def z_levels(self):
        z = [0.0]
        for h in self.floor_heights:
            z.append(z[-1] + h)
        return z

    @property
    def wall_top(self):
        return self.z_levels[-1]

    def roof_loops(self):
        return [self.wireframe.face_points(k) for k in self.roof_faces]


MIN_FOOTPRINT_EDGE = 0.8


def min_edge_length(poly):
    a = poly.array
    return float(np.min(np.hypot(*(np.roll(a, -1, axis=0) - a).T)))


# ---------------------------------------------------------------------------
# extensions


def _edge_frame(a, b):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    d = b - a
    length = float(np.hypot(*d))
    t = d / length
    n = np.array([t[1], -t[0]])  # outward for CCW rings
    return a, t, n, length


def _extension_piece(a, t, n, start, ext):
    p0 = a + t * start
    p1 = a + t * (start + ext.width)
    if ext.kind == ExtensionKind.TRAPEZOIDAL:
        inset = ext.depth * math.tan(math.radians(ext.taper_deg))
    else:
        inset = 0.0
    q0 = p0 + t * inset + n * ext.depth
    q1 = p1 - t * inset + n * ext.depth
    return [tuple(p0), tuple(q0), tuple(q1), tuple(p1)]


def place_extensions(footprint, extensions, rng, attempts=25, margin=0.8):
    """Attach extensions flush to distinct edges.

    Returns ``(polygon, pieces)``; raises :class:`GeometryError` when no valid
    placement is found within ``attempts``.
    """
    if len(extensions) > MAX_EXTENSIONS:
        raise GeometryError(f"at most {MAX_EXTENSIONS} extensions, got {len(extensions)}")
    if not extensions:
        return footprint, []
    for ext in extensions:
        if ext.kind == ExtensionKind.TRAPEZOIDAL:
            inset = ext.depth * math.tan(math.radians(ext.taper_deg))
            if 2 * inset >= ext.width:
                raise GeometryError("trapezoid taper collapses the outer edge")
    edges = footprint.edges()
    base_area = footprint.to_shapely().area
    for _ in range(attempts):
        order = rng.permutation(len(edges))
        chosen = {}
        for ext in extensions:
            for ei in order:
                ei = int(ei)
                if ei in chosen:
                    continue
                a, b = edges[ei]
                _, _, _, length = _edge_frame(a, b)
                if length >= ext.width + 2 * margin:
                    chosen[ei] = ext
                    break
            else:
                break
        if len(chosen) != len(extensions):
            continue
        verts = []
        pieces = []
        for i, (a, b) in enumerate(edges):
            verts.append(a)
            if i in chosen:
                ext = chosen[i]
                origin, t, n, length = _edge_frame(a, b)
                start = margin + rng.uniform(0.0, length - ext.width - 2 * margin)
                piece = _extension_piece(origin, t, n, start, ext)
                pieces.append(piece)
                verts.extend(piece)
        poly = sg.Polygon(verts)
        expected = base_area + sum(sg.Polygon(p).area for p in pieces)
        if poly.is_valid and abs(poly.area - expected) <= 1e-6 * expected:
            result = FootprintPolygon.from_points(verts)
            if min_edge_length(result) >= MIN_FOOTPRINT_EDGE - 1e-9:
                return result, pieces
    raise GeometryError(f"could not place {len(extensions)} extensions without overlap")


def append_extensions(footprint, extensions, seed):
    """Footprint grown by up to four flush rectangular/trapezoidal extensions."""
    poly, _ = place_extensions(footprint, list(extensions), stream(seed, "extensions.place"))
    return poly


# ---------------------------------------------------------------------------
# roofs


@dataclass
class _Slope:
    """Planar roof patch parameterised by horizontal (u, w) coordinates."""

    tag: str
    origin: np.ndarray  # 3-D point at (u, w) = (0, 0)
    U: np.ndarray  # horizontal unit along the eave
    W: np.ndarray  # horizontal unit pointing upslope
    slope: float  # rise per horizontal meter along W
    poly: list  # convex polygon in (u, w)

    def at(self, u, w, dz=0.0):
        p = self.origin + u * self.U + w * self.W
        return (float(p[0]), float(p[1]), float(p[2] + self.slope * w + dz))

    def loop(self, poly=None):
        return [self.at(u, w) for u, w in (poly if poly is not None else self.poly)]


def _block_frame(block):
    """Local (s, t) frame with s along the longer side; returns (L, D, to_world)."""
    wx, wy = block.x1 - block.x0, block.y1 - block.y0
    if wx >= wy:
        return wx, wy, lambda s, t: np.array([block.x0 + s, block.y0 + t])
    return wy, wx, lambda s, t: np.array([block.x1 - t, block.y0 + s])


def _roof_geometry(block, z0):
    """(slopes, extra vertical faces) for one roof block."""
    L, D, W2 = _block_frame(block)
    r = block.rise
    kind = RoofKind(block.kind)

    def slope(tag, o, u_dir, w_dir, rate, poly):
        o3 = np.array([*W2(*o), z0])
        U = np.array([*(W2(*np.add(o, u_dir)) - W2(*o)), 0.0])
        Wv = np.array([*(W2(*np.add(o, w_dir)) - W2(*o)), 0.0])
        return _Slope(tag, o3, U, Wv, rate, poly)

    def p3(s, t, z):
        x, y = W2(s, t)
        return (float(x), float(y), float(z))

    if kind == RoofKind.FLAT:
        return [slope("top", (0, 0), (1, 0), (0, 1), 0.0, [(0, 0), (L, 0), (L, D), (0, D)])], []
    if kind == RoofKind.SHED:
        s = slope("slope", (0, 0), (1, 0), (0, 1), r / D, [(0, 0), (L, 0), (L, D), (0, D)])
        extra = [
            [p3(L, D, z0), p3(0, D, z0), p3(0, D, z0 + r), p3(L, D, z0 + r)],
            [p3(0, 0, z0), p3(0, D, z0 + r), p3(0, D, z0)],
            [p3(L, 0, z0), p3(L, D, z0), p3(L, D, z0 + r)],
        ]
        return [s], extra
    h = D / 2.0
    if kind == RoofKind.GABLED:
        poly = [(0, 0), (L, 0), (L, h), (0, h)]
        slopes = [
            slope("south", (0, 0), (1, 0), (0, 1), r / h, poly),
            slope("north", (L, D), (-1, 0), (0, -1), r / h, poly),
        ]
        extra = [
            [p3(0, D, z0), p3(0, 0, z0), p3(0, h, z0 + r)],
            [p3(L, 0, z0), p3(L, D, z0), p3(L, h, z0 + r)],
        ]
        return slopes, extra
    if kind == RoofKind.HIPPED:
        e = min(h, L / 2.0 - 0.5)
        if e <= 0.1:
            raise GeometryError("block too small for a hipped roof")
        side = [(0, 0), (L, 0), (L - e, h), (e, h)]
        end = [(0, 0), (D, 0), (h, e)]
        return [
            slope("south", (0, 0), (1, 0), (0, 1), r / h, side),
            slope("north", (L, D), (-1, 0), (0, -1), r / h, side),
            slope("west", (0, D), (0, -1), (1, 0), r / e, end),
            slope("east", (L, 0), (0, 1), (-1, 0), r / e, end),
        ], []
    if kind == RoofKind.PYRAMIDAL:
        return [
            slope("south", (0, 0), (1, 0), (0, 1), r / h, [(0, 0), (L, 0), (L / 2, h)]),
            slope("north", (L, D), (-1, 0), (0, -1), r / h, [(0, 0), (L, 0), (L / 2, h)]),
            slope("west", (0, D), (0, -1), (1, 0), r / (L / 2), [(0, 0), (D, 0), (h, L / 2)]),
            slope("east", (L, 0), (0, 1), (-1, 0), r / (L / 2), [(0, 0), (D, 0), (h, L / 2)]),
        ], []
    raise GeometryError(f"unknown roof kind {block.kind}")


def roof_faces_for_tags(kind):
    return {
        RoofKind.FLAT: ("top",),
        RoofKind.SHED: ("slope",),
        RoofKind.GABLED: ("south", "north"),
        RoofKind.HIPPED: ("south", "north", "west", "east"),
        RoofKind.PYRAMIDAL: ("south", "north", "west", "east"),
    }[RoofKind(kind)]


def _clip(poly, a, b, c):
    """Keep the part of a convex (u, w) polygon where a*u + b*w <= c."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp <= 1e-12:
            out.append(p)
        if (fp < -1e-12 and fq > 1e-12) or (fp > 1e-12 and fq < -1e-12):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out if len(out) >= 3 and abs(sg.Polygon(out).area) > 1e-9 else None


def _hole_rect(sl, ss, margin=0.3):
    us = [p[0] for p in sl.poly]
    ws = [p[1] for p in sl.poly]
    cu = min(us) + ss.center_u * (max(us) - min(us))
    cw = min(ws) + ss.center_w * (max(ws) - min(ws))
    u0, u1 = cu - ss.size_u / 2, cu + ss.size_u / 2
    w0, w1 = cw - ss.size_w / 2, cw + ss.size_w / 2
    shrunk = sg.Polygon(sl.poly).buffer(-margin, join_style=2)
    if shrunk.is_empty or not shrunk.contains(sg.box(u0, w0, u1, w1)):
        return None
    return u0, u1, w0, w1


def _cut_hole(sl, hole):
    u0, u1, w0, w1 = hole
    pieces = [_clip(sl.poly, 0, 1, w0), _clip(sl.poly, 0, -1, -w1)]
    band = _clip(_clip(sl.poly, 0, -1, -w0) or [], 0, 1, w1) if _clip(sl.poly, 0, -1, -w0) else None
    if band:
        pieces += [_clip(band, 1, 0, u0), _clip(band, -1, 0, -u1)]
    return [sl.loop(p) for p in pieces if p]


def _chimney_faces(sl, hole, height):
    u0, u1, w0, w1 = hole
    A, B, C, D = sl.at(u0, w0), sl.at(u1, w0), sl.at(u1, w1), sl.at(u0, w1)
    ztop = max(A[2], C[2]) + height
    up = lambda p: (p[0], p[1], ztop)  # noqa: E731
    return [
        [A, B, up(B), up(A)],
        [B, C, up(C), up(B)],
        [C, D, up(D), up(C)],
        [D, A, up(A), up(D)],
        [up(A), up(B), up(C), up(D)],
    ]


def _dormer_faces(sl, hole, height):
    u0, u1, w0, w1 = hole
    um = (u0 + u1) / 2
    A, B, C, D = sl.at(u0, w0), sl.at(u1, w0), sl.at(u1, w1), sl.at(u0, w1)
    zh = C[2]
    dz_front = zh - A[2]
    rr = min(height, (u1 - u0) / 2)
    B_hi = sl.at(u1, w0, dz_front)
    A_hi = sl.at(u0, w0, dz_front)
    R_front = sl.at(um, w0, dz_front + rr)
    R_back = sl.at(um, w1, rr)
    return [
        [A, B, B_hi, R_front, A_hi],
        [B, C, B_hi],
        [D, A, A_hi],
        [A_hi, R_front, R_back, D],
        [R_front, B_hi, C, R_back],
        [C, D, R_back],
    ]


def _roof_window_loop(sl, hole):
    u0, u1, w0, w1 = hole
    return np.array([sl.at(u0, w0), sl.at(u1, w0), sl.at(u1, w1), sl.at(u0, w1)])


# ---------------------------------------------------------------------------
# hull assembly


def _resolve_t_junctions(points, faces, eps=EPS_MERGE):
    pts = np.asarray(points)
    out = []
    for f in faces:
        loop = []
        for a, b in loop_edges(f):
            loop.append(a)
            pa, pb = pts[a], pts[b]
            d = pb - pa
            ll = float(d @ d)
            if ll == 0:
                continue
            t = (pts - pa) @ d / ll
            proj = pa + t[:, None] * d
            dist = np.linalg.norm(pts - proj, axis=1)
            mask = (t > 1e-9) & (t < 1 - 1e-9) & (dist < eps)
            mask[[a, b]] = False
            inner = np.nonzero(mask)[0]
            loop.extend(int(k) for k in inner[np.argsort(t[inner], kind="stable")])
        out.append(loop)
    return out


def _polygon_pieces(geom):
    if geom.is_empty:
        return []
    geoms = getattr(geom, "geoms", [geom])
    pieces = []
    for g in geoms:
        if isinstance(g, sg.Polygon) and g.area > 1e-6:
            if g.interiors:
                raise GeometryError("horizontal roof region has a hole")
            pieces.append(list(g.exterior.coords)[:-1])
        elif hasattr(g, "geoms"):
            pieces.extend(_polygon_pieces(g))
    return pieces


def build_hull(footprints, floor_heights, blocks, superstructures=()):
    """Assemble a watertight hull from per-floor footprints and roof blocks."""
    footprints = tuple(footprints)
    floor_heights = tuple(float(h) for h in floor_heights)
    if len(footprints) != len(floor_heights) or not footprints:
        raise GeometryError("need one height per floor and at least one floor")
    z = np.concatenate([[0.0], np.cumsum(floor_heights)])
    faces = []
    roof_flags = []

    def add(loop, roof=False):
        faces.append([tuple(map(float, p)) for p in loop])
        roof_flags.append(roof)

    add([(x, y, 0.0) for x, y in footprints[0].vertices[::-1]])
    for i, fp in enumerate(footprints):
        for a, b in fp.edges():
            add([(a[0], a[1], z[i]), (b[0], b[1], z[i]), (b[0], b[1], z[i + 1]), (a[0], a[1], z[i + 1])])
    for i in range(len(footprints) - 1):
        lower, upper = footprints[i].to_shapely(), footprints[i + 1].to_shapely()
        if not lower.buffer(1e-6).contains(upper):
            raise GeometryError(f"floor {i + 1} overhangs floor {i}")
        for piece in _polygon_pieces(lower.difference(upper)):
            add([(x, y, z[i + 1]) for x, y in piece], roof=True)

    wt = float(z[-1])
    top = footprints[-1].to_shapely()
    block_union = unary_union([b.polygon().to_shapely() for b in blocks]) if blocks else sg.Polygon()
    if blocks and not top.buffer(1e-6).contains(block_union):
        raise GeometryError("roof blocks exceed the top floor footprint")
    for piece in _polygon_pieces(top.difference(block_union)):
        add([(x, y, wt) for x, y in piece], roof=True)

    windows = []
    placed = []
    by_face = {}
    for ss in superstructures:
        by_face.setdefault(ss.face, ss)
    for bi, block in enumerate(blocks):
        slopes, extra = _roof_geometry(block, wt)
        for loop in extra:
            add(loop, roof=True)
        for sl in slopes:
            ss = by_face.get(f"{bi}:{sl.tag}")
            hole = _hole_rect(sl, ss) if ss is not None else None
            if hole is None or ss.kind == "roof_window":
                add(sl.loop(), roof=True)
                if hole is not None:
                    windows.append(_roof_window_loop(sl, hole))
                    placed.append(ss)
                continue
            for loop in _cut_hole(sl, hole):
                add(loop, roof=True)
            maker = _chimney_faces if ss.kind == "chimney" else _dormer_faces
            for loop in maker(sl, hole, ss.height):
                add(loop, roof=True)
            placed.append(ss)

    flat = [p for f in faces for p in f]
    pts, index = merge_points(flat)
    loops, k = [], 0
    for f in faces:
        idx = [int(index[k + j]) for j in range(len(f))]
        k += len(f)
        dedup = [v for j, v in enumerate(idx) if v != idx[j - 1]]
        loops.append(dedup)
    loops = _resolve_t_junctions(pts, loops)
    if not is_watertight(loops):
        raise GeometryError("assembled hull is not watertight")
    edges = {(min(a, b), max(a, b)) for f in loops for a, b in loop_edges(f)}
    wf = WireframeGraph(pts, adjacency_from_edges(len(pts), edges), tuple(tuple(f) for f in loops))
    roof_idx = tuple(i for i, r in enumerate(roof_flags) if r)
    return BuildingHull(
        wireframe=wf,
        roof_faces=roof_idx,
        floor_footprints=footprints,
        floor_heights=floor_heights,
        blocks=tuple(blocks),
        roof_windows=tuple(windows),
        superstructures=tuple(placed),
    )


def _partner_rect(spec):
    p = spec.merge_partner
    W, D = spec.base_width, spec.base_depth
    pw, pd = p.base_width, p.base_depth  # pw along the shared side, pd outward
    o = spec.merge_offset
    side = spec.merge_side % 4
    if side == 0:
        return (o, -pd, o + pw, 0.0)
    if side == 1:
        return (W, o, W + pd, o + pw)
    if side == 2:
        return (o, D, o + pw, D + pd)
    return (-pd, o, 0.0, o + pw)


def hull_from_spec(spec, seed=0):
    """Deterministically build the hull described by ``spec``."""
    blocks = [RoofBlock(0.0, 0.0, spec.base_width, spec.base_depth, RoofKind(spec.roof), spec.roof_rise)]
    if spec.merge_partner is not None:
        p = spec.merge_partner
        if p.stories != spec.stories or p.floor_height != spec.floor_height:
            raise GeometryError("merge partner story layout differs")
        x0, y0, x1, y1 = _partner_rect(spec)
        blocks.append(RoofBlock(x0, y0, x1, y1, RoofKind(p.roof), p.roof_rise))
    union = unary_union([b.polygon().to_shapely() for b in blocks])
    if not isinstance(union, sg.Polygon):
        raise GeometryError("merge partner does not share a wall with the base")
    core = FootprintPolygon.from_shapely(union)
    if min_edge_length(core) < MIN_FOOTPRINT_EDGE:
        raise GeometryError("merged footprint has a wall shorter than the minimum")
    full, _ = place_extensions(core, list(spec.extensions), stream(seed, "extensions.place"))
    floors = [full] * spec.stories
    if spec.setback_top and spec.stories > 1 and spec.extensions:
        floors[-1] = core
    return build_hull(floors, [spec.floor_height] * spec.stories, blocks, spec.superstructures)


def sample_spec(seed, config=None):
    """Draw an :class:`ExteriorSpec` from named random streams."""
    cfg = (config or ExteriorConfig()).validate()

    def u(name, rng_range):
        return float(stream(seed, name).uniform(*rng_range))

    stories = int(stream(seed, "stories").integers(cfg.stories_range[0], cfg.stories_range[1] + 1))
    kinds = [RoofKind(k) for k in cfg.roof_kinds_enabled]
    roof = kinds[int(stream(seed, "roof.kind").integers(len(kinds)))]
    W = round(u("base.width", cfg.base_width_range_m), 2)
    D = round(u("base.depth", cfg.base_depth_range_m), 2)
    rise = round(u("roof.rise", cfg.roof_rise_range_m), 2)

    partner = None
    side, offset = 1, 0.0
    if stream(seed, "merge.p").random() < cfg.p_merge:
        rng = stream(seed, "merge.shape")
        side = int(rng.integers(4))
        along = D if side in (1, 3) else W
        pw = round(float(rng.uniform(0.5, 1.0)) * along, 2)
        pd = round(float(rng.uniform(4.0, 8.0)), 2)
        lo, hi = -pw + 2.5, along - 2.5
        offset = round(float(rng.uniform(lo, hi)), 2) if hi > lo else 0.0
        # flush-align near-coincident ends instead of leaving sliver walls
        if abs(offset) < 1.0:
            offset = 0.0
        elif abs(offset + pw - along) < 1.0:
            offset = round(along - pw, 2)
        partner = ExteriorSpec(
            base_width=pw,
            base_depth=pd,
            stories=stories,
            floor_height=cfg.floor_height_m,
            roof=kinds[int(rng.integers(len(kinds)))],
            roof_rise=round(u("merge.rise", cfg.roof_rise_range_m), 2),
        )

    extensions = []
    if stream(seed, "extension.p").random() < cfg.p_extension and cfg.max_extensions > 0:
        rng = stream(seed, "extension.shape")
        count = int(rng.integers(1, cfg.max_extensions + 1))
        for _ in range(count):
            kind = ExtensionKind.TRAPEZOIDAL if rng.random() < 0.5 else ExtensionKind.RECTANGULAR
            width = round(float(rng.uniform(2.5, 5.0)), 2)
            depth = round(float(rng.uniform(1.5, 3.5)), 2)
            taper = float(rng.choice([30.0, 45.0])) if kind == ExtensionKind.TRAPEZOIDAL else 0.0
            depth = min(depth, 0.45 * width / max(math.tan(math.radians(taper)), 1e-9)) if taper else depth
            extensions.append(Extension(kind, width, round(depth, 2), taper))

    setback = bool(stream(seed, "setback.p").random() < cfg.p_setback)

    supers = []
    rng = stream(seed, "superstructures")
    tags = list(roof_faces_for_tags(roof))
    rng.shuffle(tags)
    pitched = roof != RoofKind.FLAT
    wants = []
    if pitched and rng.random() < cfg.p_dormer:
        wants.append("dormer")
    if rng.random() < cfg.p_chimney:
        wants.append("chimney")
    if pitched and rng.random() < cfg.p_roof_window:
        wants.append("roof_window")
    for kind, tag in zip(wants, tags):
        if kind == "chimney":
            size = (0.6, 0.6)
        elif kind == "dormer":
            size = (round(float(rng.uniform(1.2, 2.0)), 2), round(float(rng.uniform(1.0, 1.6)), 2))
        else:
            size = (round(float(rng.uniform(0.8, 1.2)), 2), round(float(rng.uniform(0.8, 1.2)), 2))
        supers.append(
            Superstructure(
                kind,
                f"0:{tag}",
                round(float(rng.uniform(0.3, 0.7)), 3),
                round(float(rng.uniform(0.3, 0.5)), 3),
                size[0],
                size[1],
                round(float(rng.uniform(0.6, 1.2)), 2),
            )
        )

    return ExteriorSpec(
        base_width=W,
        base_depth=D,
        stories=stories,
        floor_height=cfg.floor_height_m,
        roof=roof,
        roof_rise=rise,
        superstructures=tuple(supers),
        merge_partner=partner,
        merge_side=side,
        merge_offset=offset,
        extensions=tuple(extensions),
        setback_top=setback,
    )


def generate_exterior(seed, config=None, attempts=8):
    """Random watertight hull for ``seed``; identical output for identical inputs."""
    cfg = (config or ExteriorConfig()).validate()
    last = None
    for k in range(attempts):
        sub = seed if k == 0 else derive_seed(seed, "retry", k)
        try:
            return hull_from_spec(sample_spec(sub, cfg), seed=sub)
        except GeometryError as exc:
            last = exc
    raise GeometryError(f"no valid exterior for seed {seed}: {last}")


def merge_buildings(hull_a, hull_b, offset=(0.0, 0.0)):
    """Fuse two hulls; ``hull_b`` is shifted by ``offset`` before the union."""
    if hull_a.floor_heights != hull_b.floor_heights:
        raise GeometryError("story heights of merged hulls differ")
    dx, dy = offset
    floors = []
    for fa, fb in zip(hull_a.floor_footprints, hull_b.floor_footprints):
        pa, pb = fa.to_shapely(), fb.translated(dx, dy).to_shapely()
        if pa.buffer(1e-6).contains(pb) or pb.buffer(1e-6).contains(pa):
            raise GeometryError("one hull is contained in the other")
        shared = pa.intersection(pb)
        if shared.area <= 1e-9 and pa.boundary.intersection(pb.boundary).length <= 1e-6:
            raise GeometryError("hull footprints are disjoint")
        u = unary_union([pa, pb])
        if not isinstance(u, sg.Polygon) or u.interiors:
            raise GeometryError("merged footprint is not a simple polygon")
        floors.append(FootprintPolygon.from_shapely(u))
    blocks_b = [b.shifted(dx, dy) for b in hull_b.blocks]
    blocks = list(hull_a.blocks) + blocks_b
    overlap = any(
        p.polygon().to_shapely().intersection(q.polygon().to_shapely()).area > 1e-9
        for i, p in enumerate(blocks)
        for q in blocks[i + 1 :]
    )
    supers = hull_a.superstructures
    if overlap:
        blocks = [replace(b, kind=RoofKind.FLAT) for b in blocks]
        supers = ()
    return build_hull(floors, hull_a.floor_heights, blocks, supers)


def decompose_floors(hull):
    """``[(footprint, z_base, z_top), ...]`` in ascending z."""
    z = hull.z_levels
    return [(fp, z[i], z[i + 1]) for i, fp in enumerate(hull.floor_footprints)]
