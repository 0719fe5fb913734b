"""Synthetic wall layouts with known vector graphs, for vectorizer roundtrips.

Coordinates are continuous pixel coordinates (pixel (r, c) centered at
(c + 0.5, r + 0.5)) on a 256 x 256 grid.
"""

import math

import numpy as np
import shapely.geometry as sg
from shapely.ops import split, unary_union

from synbuild import kernels

GRID = 256
WALL_PX = 3.0


def _cut(poly, angle_deg, frac):
    """Split ``poly`` by a line at ``angle_deg`` placed at ``frac`` of its extent across."""
    d = np.array([math.cos(math.radians(angle_deg)), math.sin(math.radians(angle_deg))])
    n = np.array([-d[1], d[0]])
    pts = np.asarray(poly.exterior.coords)
    proj = pts @ n
    off = proj.min() + frac * (proj.max() - proj.min())
    c = n * off
    line = sg.LineString([c - 1e3 * d, c + 1e3 * d])
    parts = [g for g in split(poly, line).geoms if g.area > 1]
    return parts if len(parts) == 2 else None


def _thin(poly, min_w):
    # smallest width over the edge directions of the piece
    pts = np.asarray(poly.exterior.coords)[:-1]
    widths = []
    for k in range(len(pts)):
        e = pts[(k + 1) % len(pts)] - pts[k]
        e = e / np.hypot(*e)
        nrm = np.array([-e[1], e[0]])
        p = pts @ nrm
        widths.append(p.max() - p.min())
    return min(widths) < min_w


def _min_edge(poly):
    pts = np.asarray(poly.exterior.coords)
    return float(np.min(np.hypot(*np.diff(pts, axis=0).T)))


def footprint(rng, oblique):
    x0, y0 = rng.uniform(40, 60, 2)
    w, h = rng.uniform(130, 170, 2)
    x1, y1 = x0 + w, y0 + h
    if not oblique:
        if rng.random() < 0.5:
            return sg.box(x0, y0, x1, y1)
        cx, cy = rng.uniform(0.35, 0.6) * w, rng.uniform(0.35, 0.6) * h
        return sg.Polygon([(x0, y0), (x1, y0), (x1, y1 - cy), (x1 - cx, y1 - cy), (x1 - cx, y1), (x0, y1)])
    kind = rng.integers(3)
    if kind == 0:  # 45 degree chamfer
        c = rng.uniform(35, 55)
        return sg.Polygon([(x0, y0), (x1, y0), (x1, y1 - c), (x1 - c, y1), (x0, y1)])
    if kind == 1:  # one side leaning 30 degrees off vertical
        dx = h * math.tan(math.radians(30))
        return sg.Polygon([(x0, y0), (x1, y0), (x1 - dx, y1), (x0, y1)])
    c = rng.uniform(30, 45)  # two chamfers
    return sg.Polygon([(x0 + c, y0), (x1, y0), (x1, y1 - c), (x1 - c, y1), (x0, y1), (x0, y0 + c)])


def layout(seed, oblique=False, min_w=28.0, min_edge=14.0, attempts=200):
    """(footprint, rooms) with every room at least ``min_w`` pixels wide."""
    rng = np.random.default_rng(seed)
    fp = footprint(rng, oblique)
    angles = (0, 90, 45, 135) if oblique else (0, 90)
    n_rooms = int(rng.integers(3, 6))
    for _ in range(attempts):
        rooms = [fp]
        while len(rooms) < n_rooms:
            k = int(np.argmax([r.area for r in rooms]))
            ang = float(angles[rng.integers(len(angles))])
            parts = _cut(rooms[k], ang, rng.uniform(0.3, 0.7))
            if parts is None or any(_thin(p, min_w) or _min_edge(p) < min_edge for p in parts):
                break
            rooms[k:k + 1] = parts
        if len(rooms) == n_rooms:
            # junctions from both sides of a wall must not crowd each other either
            nodes, edges = wall_graph(rooms)
            if min(np.hypot(*(nodes[a] - nodes[b])) for a, b in edges) >= min_edge:
                return fp, rooms
    raise RuntimeError(f"no layout for seed {seed}")


def wall_graph(rooms, straight_deg=1.0):
    """Nodes and edges of the room boundaries, noded at every junction."""
    # splitting leaves 1e-14 noise that would keep near-duplicate vertices apart
    merged = unary_union([sg.LineString(np.round(r.exterior.coords, 6)) for r in rooms])
    segs = []
    for line in getattr(merged, "geoms", [merged]):
        c = np.asarray(line.coords)
        segs.extend(zip(map(tuple, c[:-1]), map(tuple, c[1:])))
    key = {}
    pts = []

    def node(p):
        k = (round(p[0], 6), round(p[1], 6))
        if k not in key:
            key[k] = len(pts)
            pts.append(p)
        return key[k]

    edges = {tuple(sorted((node(a), node(b)))) for a, b in segs}
    edges = {e for e in edges if e[0] != e[1]}
    edges = _split_at_nodes(np.asarray(pts, dtype=float), edges)
    # drop degree-2 nodes where the wall runs straight on
    changed = True
    while changed:
        changed = False
        nbrs = {}
        for a, b in edges:
            nbrs.setdefault(a, set()).add(b)
            nbrs.setdefault(b, set()).add(a)
        for v, ns in nbrs.items():
            if len(ns) != 2:
                continue
            a, b = sorted(ns)
            d1 = np.subtract(pts[v], pts[a])
            d2 = np.subtract(pts[b], pts[v])
            cos = d1 @ d2 / (np.hypot(*d1) * np.hypot(*d2))
            if cos >= math.cos(math.radians(straight_deg)):
                edges -= {tuple(sorted((a, v))), tuple(sorted((v, b)))}
                edges.add((a, b))
                changed = True
                break
    used = sorted({i for e in edges for i in e})
    idx = {v: i for i, v in enumerate(used)}
    nodes = np.array([pts[v] for v in used], dtype=float)
    return nodes, {tuple(sorted((idx[a], idx[b]))) for a, b in edges}


def _split_at_nodes(pts, edges, tol=1e-5):
    # T-junctions that the union missed because the endpoint is only nearly on the wall
    out = set()
    for a, b in edges:
        d = pts[b] - pts[a]
        ll = d @ d
        t = (pts - pts[a]) @ d / ll
        off = np.abs(d[0] * (pts[:, 1] - pts[a][1]) - d[1] * (pts[:, 0] - pts[a][0])) / math.sqrt(ll)
        inner = [(t[k], k) for k in range(len(pts)) if k not in (a, b) and 0 < t[k] < 1 and off[k] < tol]
        chain = [a] + [k for _, k in sorted(inner)] + [b]
        out.update(tuple(sorted(e)) for e in zip(chain[:-1], chain[1:]))
    return out


def rasterize_walls(nodes, edges, wall_px=WALL_PX, size=GRID):
    segs = [[*nodes[a], *nodes[b]] for a, b in edges]
    d = kernels.segment_distance_field((size, size), segs, wall_px + 2)
    return (d < wall_px / 2.0).astype(np.uint8)


def ring_rectangle(x0=60.0, y0=70.0, x1=190.0, y1=170.0):
    nodes = np.array([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    return nodes, {(0, 1), (1, 2), (2, 3), (0, 3)}


def compare_graphs(gt_nodes, gt_edges, nodes, adj, tol=2.0):
    """(Hausdorff distance, edge sets identical) under nearest-node matching."""
    from scipy.spatial.distance import cdist

    if len(nodes) == 0 or len(gt_nodes) == 0:
        return math.inf, False
    d = cdist(gt_nodes, nodes)
    haus = max(d.min(axis=1).max(), d.min(axis=0).max())
    match = d.argmin(axis=1)
    if len(set(match.tolist())) != len(gt_nodes) or len(nodes) != len(gt_nodes):
        return haus, False
    got = {tuple(sorted((int(a), int(b)))) for a, b in zip(*np.nonzero(np.triu(adj, 1)))}
    want = {tuple(sorted((int(match[a]), int(match[b])))) for a, b in gt_edges}
    return haus, got == want


def roundtrip(seed, oblique, cfg=None):
    from synbuild.vectorize import VectorizeConfig, vectorize_structure

    _, rooms = layout(seed, oblique)
    gt_nodes, gt_edges = wall_graph(rooms)
    bits = rasterize_walls(gt_nodes, gt_edges)
    nodes, adj = vectorize_structure(bits, cfg or VectorizeConfig(seed=seed))
    return compare_graphs(gt_nodes, gt_edges, nodes, adj)
