"""Geometric primitives and core data types shared by every pipeline stage."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.spatial import cKDTree
import shapely.geometry as sg

from . import kernels
from .labels import VALID_IDS

EPS_MERGE = 1e-4
EPS_PLANE = 1e-6


class GeometryError(ValueError):
    """Raised when an input violates a geometric precondition."""


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# polygons


def signed_area(vertices):
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[0] < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def drop_collinear(vertices, tol=1e-9):
    """Remove repeated and collinear vertices from a closed ring."""
    pts = [tuple(map(float, p)) for p in vertices]
    changed = True
    while changed and len(pts) > 3:
        changed = False
        for i in range(len(pts)):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
            ab = math.hypot(b[0] - a[0], b[1] - a[1])
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if ab <= tol or abs(cross) <= tol * max(1.0, ab * math.hypot(c[0] - a[0], c[1] - a[1])):
                del pts[i]
                changed = True
                break
    return pts


@dataclass(frozen=True)
class FootprintPolygon:
    """Simple counter-clockwise polygon in meters."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        if not all(math.isfinite(c) for p in verts for c in p):
            raise GeometryError("polygon has non-finite coordinates")
        area = signed_area(verts)
        if area <= 0.0:
            if area == 0.0:
                raise GeometryError("polygon has zero area")
            raise GeometryError("polygon must be counter-clockwise")
        if not sg.Polygon(verts).is_valid:
            raise GeometryError("polygon is not simple")

    @classmethod
    def from_points(cls, points):
        """Build from any orientation, dropping collinear vertices."""
        pts = drop_collinear(points)
        if signed_area(pts) < 0:
            pts = pts[::-1]
        return cls(tuple(pts))

    @classmethod
    def from_shapely(cls, geom):
        if not isinstance(geom, sg.Polygon) or geom.interiors:
            raise GeometryError(f"expected a hole-free polygon, got {geom.geom_type}")
        return cls.from_points(list(geom.exterior.coords)[:-1])

    def to_shapely(self):
        return sg.Polygon(self.vertices)

    @property
    def array(self):
        return np.asarray(self.vertices, dtype=float)

    def edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def bounds(self):
        a = self.array
        return float(a[:, 0].min()), float(a[:, 1].min()), float(a[:, 0].max()), float(a[:, 1].max())

    def translated(self, dx, dy):
        return FootprintPolygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    def __len__(self):
        return len(self.vertices)


def rectangle(x0, y0, width, depth):
    return FootprintPolygon(((x0, y0), (x0 + width, y0), (x0 + width, y0 + depth), (x0, y0 + depth)))


def polygon_area(poly):
    """Shoelace area of a polygon in m^2."""
    verts = poly.vertices if isinstance(poly, FootprintPolygon) else poly
    if len(verts) < 3:
        raise GeometryError("degenerate polygon: fewer than 3 vertices")
    area = signed_area(verts)
    if area == 0.0:
        raise GeometryError("degenerate polygon: zero area")
    return abs(area)


def point_in_polygon(p, poly):
    """Even-odd membership test; points on an edge or vertex count as inside."""
    verts = poly.array if isinstance(poly, FootprintPolygon) else np.asarray(poly, dtype=float)
    return bool(
        kernels.points_in_polygon(np.array([p[0]]), np.array([p[1]]), verts[:, 0], verts[:, 1])[0]
    )


def congruent(a, b, eps=EPS_MERGE):
    """True when both polygons have the same vertex set up to a translation."""
    if len(a) != len(b):
        return False
    pa = a.array - a.array.min(axis=0)
    pb = b.array - b.array.min(axis=0)
    tree = cKDTree(pb)
    d, _ = tree.query(pa)
    return bool(np.all(d <= eps))


# ---------------------------------------------------------------------------
# rasters


@dataclass(frozen=True)
class GridFrame:
    """Maps pixel ``(row, col)`` to world meters.

    Pixel (r, c) has its center at ``origin + ((c + 0.5) * scale, (r + 0.5) * scale)``.
    """

    origin_x: float
    origin_y: float
    scale: float
    width: int
    height: int

    def __post_init__(self):
        if not self.scale > 0:
            raise GeometryError("scale must be positive")

    @property
    def shape(self):
        return (self.height, self.width)

    def to_pixel(self, pts):
        """World meters -> continuous pixel coordinates ``(x, y)``."""
        p = np.asarray(pts, dtype=float)
        return np.stack([(p[..., 0] - self.origin_x) / self.scale, (p[..., 1] - self.origin_y) / self.scale], -1)

    def to_world(self, pts):
        p = np.asarray(pts, dtype=float)
        return np.stack([p[..., 0] * self.scale + self.origin_x, p[..., 1] * self.scale + self.origin_y], -1)

    def pixel_centers(self):
        rr, cc = np.mgrid[0 : self.height, 0 : self.width]
        return (
            self.origin_x + (cc + 0.5) * self.scale,
            self.origin_y + (rr + 0.5) * self.scale,
        )


def centered_frame(poly, scale, grid_size):
    w, h = (grid_size, grid_size) if np.isscalar(grid_size) else grid_size
    x0, y0, x1, y1 = poly.bounds()
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    return GridFrame(cx - w * scale / 2.0, cy - h * scale / 2.0, float(scale), int(w), int(h))


def auto_frame(poly, grid_size=256, margin=8):
    """Frame that fits ``poly`` into a square grid leaving ``margin`` px on each side."""
    x0, y0, x1, y1 = poly.bounds()
    usable = grid_size - 2 * margin
    if usable <= 0:
        raise GeometryError("grid too small for margin")
    scale = max(x1 - x0, y1 - y0) / usable
    return centered_frame(poly, scale, grid_size)


@dataclass(frozen=True)
class BinaryBitmap:
    bits: np.ndarray
    frame: GridFrame = None

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise GeometryError("bitmap must be 2-D")
        if not np.isin(bits, (0, 1)).all():
            raise GeometryError("bitmap values must be 0 or 1")
        object.__setattr__(self, "bits", _frozen(bits, np.uint8))

    @property
    def width(self):
        return self.bits.shape[1]

    @property
    def height(self):
        return self.bits.shape[0]

    def count(self):
        return int(np.count_nonzero(self.bits))


@dataclass(frozen=True)
class LabelGrid:
    labels: np.ndarray
    scale: float
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise GeometryError("label grid must be 2-D")
        if not self.scale > 0:
            raise GeometryError("scale must be positive")
        present = set(np.unique(labels).tolist())
        bad = present - VALID_IDS - {0}
        if bad:
            raise GeometryError(f"invalid label ids {sorted(bad)}")
        object.__setattr__(self, "labels", _frozen(labels, np.uint8))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def width(self):
        return self.labels.shape[1]

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def frame(self):
        return GridFrame(self.origin[0], self.origin[1], self.scale, self.width, self.height)


def rasterize_polygon(poly, scale, grid_size=256, frame=None):
    """Bitmap with 1 where the pixel center lies inside ``poly`` (boundary inclusive).

    Without an explicit ``frame`` the polygon is centered in a square grid.
    """
    if frame is None:
        frame = centered_frame(poly, scale, grid_size)
    x0, y0, x1, y1 = poly.bounds()
    need_w = math.ceil((x1 - x0) / frame.scale)
    need_h = math.ceil((y1 - y0) / frame.scale)
    fx1 = frame.origin_x + frame.width * frame.scale
    fy1 = frame.origin_y + frame.height * frame.scale
    tol = 1e-9 * frame.scale
    if x0 < frame.origin_x - tol or y0 < frame.origin_y - tol or x1 > fx1 + tol or y1 > fy1 + tol:
        raise GeometryError(
            f"polygon does not fit the {frame.width}x{frame.height} grid at {frame.scale} m/px; "
            f"needs at least {need_w}x{need_h} px"
        )
    xs, ys = frame.pixel_centers()
    verts = poly.array
    inside = kernels.points_in_polygon(xs.ravel(), ys.ravel(), verts[:, 0], verts[:, 1])
    return BinaryBitmap(inside.reshape(frame.shape).astype(np.uint8), frame)


# ---------------------------------------------------------------------------
# 3-D faces


def newell_normal(loop):
    p = np.asarray(loop, dtype=float)
    q = np.roll(p, -1, axis=0)
    n = np.array(
        [
            np.sum((p[:, 1] - q[:, 1]) * (p[:, 2] + q[:, 2])),
            np.sum((p[:, 2] - q[:, 2]) * (p[:, 0] + q[:, 0])),
            np.sum((p[:, 0] - q[:, 0]) * (p[:, 1] + q[:, 1])),
        ]
    )
    norm = np.linalg.norm(n)
    if norm == 0:
        raise GeometryError("degenerate face: zero area")
    return n / norm


def plane_deviation(loop):
    p = np.asarray(loop, dtype=float)
    n = newell_normal(p)
    d = (p - p.mean(axis=0)) @ n
    return float(np.abs(d).max())


def face_frame(loop):
    """Orthonormal in-plane axes (u, v), normal and origin of a planar loop."""
    p = np.asarray(loop, dtype=float)
    n = newell_normal(p)
    helper = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(helper, n)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v, n, p[0].copy()


def face_area(loop):
    p = np.asarray(loop, dtype=float)
    n = newell_normal(p)
    total = np.zeros(3)
    for i in range(len(p)):
        total += np.cross(p[i], p[(i + 1) % len(p)])
    return float(abs(total @ n) / 2.0)


def _ear_clip(pts2d):
    n = len(pts2d)
    idx = list(range(n))
    if signed_area(pts2d) < 0:
        idx.reverse()
    tris = []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    guard = 0
    while len(idx) > 3 and guard < 10 * n * n:
        guard += 1
        m = len(idx)
        clipped = False
        for k in range(m):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = pts2d[i0], pts2d[i1], pts2d[i2]
            cr = cross(a, b, c)
            scale = max(1e-300, abs(b[0] - a[0]) + abs(b[1] - a[1])) * max(1e-300, abs(c[0] - b[0]) + abs(c[1] - b[1]))
            if cr <= 1e-12 * scale:
                if abs(cr) <= 1e-12 * scale and len(idx) > 3:
                    # collinear vertex contributes no area; drop it
                    a_b = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1])
                    if a_b > 0:
                        idx.pop(k)
                        clipped = True
                        break
                continue
            ok = True
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                p = pts2d[j]
                if cross(a, b, p) >= 0 and cross(b, c, p) >= 0 and cross(c, a, p) >= 0:
                    ok = False
                    break
            if ok:
                tris.append((i0, i1, i2))
                idx.pop(k)
                clipped = True
                break
        if not clipped:
            raise GeometryError("ear clipping failed; loop is not simple")
    if len(idx) == 3:
        tris.append(tuple(idx))
    return tris


def triangulate_face(loop, eps_plane=EPS_PLANE):
    """Split a simple planar 3-D loop into triangles (list of 3x3 arrays)."""
    p = np.asarray(loop, dtype=float)
    if p.ndim != 2 or p.shape[0] < 3 or p.shape[1] != 3:
        raise GeometryError("face needs at least 3 points in 3-D")
    if plane_deviation(p) > eps_plane:
        raise GeometryError(f"face is not planar within {eps_plane} m")
    if p.shape[0] == 3:
        return [p.copy()]
    u, v, _, o = face_frame(p)
    pts2d = [((q - o) @ u, (q - o) @ v) for q in p]
    return [p[list(t)] for t in _ear_clip(pts2d)]


# ---------------------------------------------------------------------------
# wireframes


def merge_points(points, eps=EPS_MERGE):
    """Cluster points closer than ``eps``; first occurrence is the representative.

    Returns ``(unique_points, index_map)`` with ``unique_points[index_map[i]]``
    standing in for ``points[i]``.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        return pts.copy(), np.zeros(0, dtype=np.int64)
    tree = cKDTree(pts)
    rep = np.arange(len(pts))
    for i, j in sorted(tree.query_pairs(eps)):
        ri, rj = rep[i], rep[j]
        while rep[ri] != ri:
            ri = rep[ri]
        while rep[rj] != rj:
            rj = rep[rj]
        if ri != rj:
            lo, hi = min(ri, rj), max(ri, rj)
            rep[hi] = lo
    for i in range(len(pts)):
        r = i
        while rep[r] != r:
            r = rep[r]
        rep[i] = r
    keep = np.unique(rep)
    new_index = np.full(len(pts), -1, dtype=np.int64)
    new_index[keep] = np.arange(len(keep))
    return pts[keep].copy(), new_index[rep]


def adjacency_from_edges(n, edges):
    adj = np.zeros((n, n), dtype=np.uint8)
    for a, b in edges:
        if a != b:
            adj[a, b] = adj[b, a] = 1
    return adj


def edges_from_adjacency(adj):
    a, b = np.nonzero(np.triu(adj, 1))
    return list(zip(a.tolist(), b.tolist()))


@dataclass(frozen=True)
class WireframeGraph:
    points: np.ndarray
    adjacency: np.ndarray
    faces: tuple = field(default=())

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        adj = np.asarray(self.adjacency, dtype=np.uint8)
        object.__setattr__(self, "points", _frozen(pts, float))
        object.__setattr__(self, "adjacency", _frozen(adj, np.uint8))
        object.__setattr__(self, "faces", tuple(tuple(int(i) for i in f) for f in self.faces))

    @classmethod
    def from_edges(cls, points, edges, faces=()):
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        return cls(pts, adjacency_from_edges(len(pts), edges), faces)

    @property
    def n(self):
        return self.points.shape[0]

    def edges(self):
        return edges_from_adjacency(self.adjacency)

    def face_points(self, k):
        return self.points[list(self.faces[k])]

    def validate(self, eps_merge=EPS_MERGE, eps_plane=EPS_PLANE):
        """Raise :class:`GeometryError` on the first violated invariant."""
        n = self.n
        if not np.isfinite(self.points).all():
            raise GeometryError("non-finite point coordinates")
        if self.adjacency.shape != (n, n):
            raise GeometryError(f"adjacency shape {self.adjacency.shape} != ({n}, {n})")
        if not np.array_equal(self.adjacency, self.adjacency.T):
            raise GeometryError("adjacency is not symmetric")
        if n and np.any(np.diag(self.adjacency)):
            raise GeometryError("adjacency has self loops")
        for k, f in enumerate(self.faces):
            if len(f) < 3 or min(f) < 0 or max(f) >= n:
                raise GeometryError(f"face {k} has invalid indices")
            if plane_deviation(self.points[list(f)]) > eps_plane:
                raise GeometryError(f"face {k} is not planar")
        pairs = cKDTree(self.points).query_pairs(eps_merge) if n else set()
        if pairs:
            i, j = min(pairs)
            raise GeometryError(f"points {i} and {j} closer than {eps_merge} m")
        return self


def loop_edges(loop):
    return [(loop[i], loop[(i + 1) % len(loop)]) for i in range(len(loop))]


def is_watertight(faces):
    """Every undirected edge of the face loops is used by exactly two faces."""
    counts = {}
    for f in faces:
        for a, b in loop_edges(f):
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
    return all(c == 2 for c in counts.values())
