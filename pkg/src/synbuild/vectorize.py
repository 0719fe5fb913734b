"""Raster floor plan -> vector graph with room, door and window semantics.

Graph extraction follows a sample / anchor / contract / align loop:

1. thin the structure mask to one-pixel centerlines and trace them into
   branches between junctions and endpoints;
2. drop nodes at random along every branch (about one per ``node_stride``
   pixels) and link consecutive nodes whose connecting segment stays on
   structure pixels;
3. refine for a few iterations: keep anchor nodes (junctions, endpoints and
   nodes where the wall direction turns by more than ``corner_deg``), merge
   every other node into its nearest anchor along the wall, move anchors onto
   the intersection of their least-squares wall lines and fuse anchors that
   end up closer than ``merge_px``;
4. reconnect dangling endpoints to the nearest node in their wall direction.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import ndimage
from skimage.morphology import skeletonize

from . import kernels
from . import labels as L
from .geomcore import EPS_MERGE, BinaryBitmap, GeometryError, adjacency_from_edges, edges_from_adjacency

_N8 = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


class VectorizeError(GeometryError):
    """Vectorization or semantic extraction failed on this plan."""


@dataclass(frozen=True)
class VectorizeConfig:
    node_stride: int = 4
    corner_deg: float = 20.0
    dp_tol_px: float = 1.5
    merge_px: float = 3.0
    spur_px: int = 6
    iterations: int = 5
    dilate_px: int = 1
    cover_frac: float = 0.95
    stray_px: float = 2.0
    seed: int = 0

    def validate(self):
        if self.node_stride < 1 or self.iterations < 0 or self.merge_px <= 0:
            raise ValueError("node_stride >= 1, iterations >= 0 and merge_px > 0 required")
        if not 0 < self.cover_frac <= 1:
            raise ValueError("cover_frac must be in (0, 1]")
        return self


@dataclass(frozen=True)
class VectorFloorPlan:
    nodes: np.ndarray  # (n, 2) meters
    adjacency: np.ndarray
    rooms: tuple = ()  # ((node loop), room label)
    doors: tuple = ()  # ((i, j), door label)
    windows: tuple = ()  # (i, j)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).reshape(-1, 2)
        adj = np.array(self.adjacency, dtype=np.uint8)
        nodes.setflags(write=False)
        adj.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "rooms", tuple((tuple(int(i) for i in lp), int(t)) for lp, t in self.rooms))
        object.__setattr__(self, "doors", tuple(((int(a), int(b)), int(t)) for (a, b), t in self.doors))
        object.__setattr__(self, "windows", tuple((int(a), int(b)) for a, b in self.windows))

    def edges(self):
        return edges_from_adjacency(self.adjacency)

    def has_edge(self, a, b):
        return bool(self.adjacency[a, b])

    def validate(self, eps_merge=EPS_MERGE):
        n = len(self.nodes)
        if self.adjacency.shape != (n, n) or not np.array_equal(self.adjacency, self.adjacency.T):
            raise GeometryError("adjacency must be square and symmetric")
        if n and np.diag(self.adjacency).any():
            raise GeometryError("adjacency has self loops")
        for (a, b), _ in self.doors:
            if not self.adjacency[a, b]:
                raise GeometryError(f"door ({a}, {b}) is not on a graph edge")
        for a, b in self.windows:
            if not self.adjacency[a, b]:
                raise GeometryError(f"window ({a}, {b}) is not on a graph edge")
        if n > 1:
            from scipy.spatial import cKDTree

            pairs = cKDTree(self.nodes).query_pairs(eps_merge)
            if pairs:
                raise GeometryError(f"nodes {min(pairs)} closer than {eps_merge}")
        return self


def structure_mask(grid):
    """1 where the label is a wall, door, open wall or window."""
    return BinaryBitmap(np.isin(grid.labels, sorted(L.STRUCTURE_IDS)).astype(np.uint8), grid.frame)


# ---------------------------------------------------------------------------
# skeleton tracing


def _pixel_graph(skel):
    """Neighbour lists of skeleton pixels, without diagonal links that shortcut a 4-path."""
    h, w = skel.shape
    pix = list(zip(*np.nonzero(skel)))
    on = set(pix)
    nbrs = {}
    for r, c in pix:
        out = []
        for dr, dc in _N8:
            q = (r + dr, c + dc)
            if q not in on:
                continue
            if dr and dc and ((r + dr, c) in on or (r, c + dc) in on):
                continue
            out.append(q)
        nbrs[(r, c)] = out
    return nbrs


def _trace(nbrs):
    """Split the pixel graph into branches between key pixels.

    Returns ``(keys, branches)``: ``keys`` maps each key pixel to a key id
    (adjacent junction pixels share one id); each branch is
    ``(key_a, key_b, [pixels])``.
    """
    junction = {p for p, n in nbrs.items() if len(n) >= 3}
    keys = {}
    kid = 0
    for p in sorted(junction):
        if p in keys:
            continue
        stack = [p]
        keys[p] = kid
        while stack:
            q = stack.pop()
            for n in nbrs[q]:
                if n in junction and n not in keys:
                    keys[n] = kid
                    stack.append(n)
        kid += 1
    for p in sorted(nbrs):
        if len(nbrs[p]) <= 1:
            keys[p] = kid
            kid += 1

    branches = []
    used = set()

    def walk(start, first):
        path = [start, first]
        prev, cur = start, first
        while cur not in keys:
            nxt = [n for n in nbrs[cur] if n != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            path.append(cur)
            if cur == start:
                break
        return path

    for p in sorted(keys):
        for n in nbrs[p]:
            if (p, n) in used:
                continue
            if n in keys and keys[n] == keys[p]:
                continue
            path = walk(p, n)
            for a, b in zip(path[:-1], path[1:]):
                used.add((a, b))
                used.add((b, a))
            end = path[-1]
            if end in keys:
                branches.append((keys[p], keys[end], path))
    # closed loops without key pixels
    seen = {q for _, _, path in branches for q in path} | set(keys)
    for p in sorted(nbrs):
        if p in seen or not nbrs[p]:
            continue
        keys[p] = kid
        path = walk(p, nbrs[p][0])
        for a, b in zip(path[:-1], path[1:]):
            used.add((a, b))
            used.add((b, a))
        seen.update(path)
        branches.append((kid, kid, path))
        kid += 1
    return keys, branches


def _skeleton_branches(bits, spur_px):
    skel = skeletonize(bits.astype(bool))
    for _ in range(3):
        nbrs = _pixel_graph(skel)
        keys, branches = _trace(nbrs)
        degree = {}
        for a, b, _ in branches:
            degree[a] = degree.get(a, 0) + 1
            degree[b] = degree.get(b, 0) + 1
        pruned = False
        for a, b, path in branches:
            if a == b:
                continue
            da, db = degree[a], degree[b]
            if (da == 1) != (db == 1) and len(path) <= spur_px:
                tip = path if da == 1 else path[::-1]
                for q in tip[:-1]:
                    skel[q] = False
                pruned = True
        if not pruned:
            break
    return keys, branches


def _douglas_peucker(pts, tol):
    """Indices of the points kept by Douglas-Peucker simplification."""
    pts = np.asarray(pts, dtype=float)
    keep = {0, len(pts) - 1}
    stack = [(0, len(pts) - 1)]
    while stack:
        i, j = stack.pop()
        if j <= i + 1:
            continue
        a, b = pts[i], pts[j]
        d = b - a
        seg = np.hypot(*d)
        mid = pts[i + 1 : j]
        if seg == 0:
            dist = np.hypot(*(mid - a).T)
        else:
            dist = np.abs(d[0] * (mid[:, 1] - a[1]) - d[1] * (mid[:, 0] - a[0])) / seg
        k = int(np.argmax(dist))
        if dist[k] > tol:
            keep.add(i + 1 + k)
            stack.append((i, i + 1 + k))
            stack.append((i + 1 + k, j))
    return sorted(keep)


# ---------------------------------------------------------------------------
# graph refinement


def _fit_line(pixels):
    """Total-least-squares line (point, unit direction) through pixel centers."""
    p = np.asarray(pixels, dtype=float)
    c = p.mean(axis=0)
    if len(p) < 2:
        return c, None
    u, s, vt = np.linalg.svd(p - c, full_matrices=False)
    return c, vt[0]


def _intersect_lines(lines):
    """Least-squares point closest to all (point, direction) lines."""
    A = np.zeros((2, 2))
    b = np.zeros(2)
    for c, d in lines:
        P = np.eye(2) - np.outer(d, d)
        A += P
        b += P @ c
    return np.linalg.solve(A, b)


def _angle_between(d1, d2):
    cosv = abs(float(np.dot(d1, d2)))
    return math.degrees(math.acos(min(1.0, cosv)))


class _Graph:
    """Mutable anchor graph: node positions plus per-edge supporting pixels."""

    def __init__(self):
        self.pos = {}
        self.edges = {}  # (a, b) with a < b -> list of pixel centers
        self.junction = set()

    def add_edge(self, a, b, pixels):
        if a == b:
            return
        key = (min(a, b), max(a, b))
        self.edges.setdefault(key, []).extend(pixels)

    def neighbours(self, n):
        return [b if a == n else a for a, b in self.edges if n in (a, b)]

    def incident(self, n):
        return [k for k in self.edges if n in k]

    def relabel(self, mapping):
        old = self.edges
        self.edges = {}
        for (a, b), px in old.items():
            self.add_edge(mapping.get(a, a), mapping.get(b, b), px)
        for a in list(self.pos):
            if mapping.get(a, a) != a:
                del self.pos[a]
        self.junction = {mapping.get(j, j) for j in self.junction}

    def edge_line(self, key, trim=2.0):
        a, b = key
        pa, pb = self.pos[a], self.pos[b]
        px = np.asarray(self.edges[key], dtype=float).reshape(-1, 2)
        if len(px) >= 3:
            far = np.minimum(np.hypot(*(px - pa).T), np.hypot(*(px - pb).T)) > trim
            core = px[far] if far.sum() >= 3 else px
            c, d = _fit_line(core)
            if d is not None:
                chord = pb - pa
                # short edges: trust the chord if the fit disagrees strongly
                if np.hypot(*chord) > 0 and _angle_between(d, chord / np.hypot(*chord)) > 30:
                    return (pa + pb) / 2, chord / np.hypot(*chord)
                return c, d
        chord = pb - pa
        n = np.hypot(*chord)
        return (pa + pb) / 2, (chord / n if n > 0 else np.array([1.0, 0.0]))


def _initial_graph(branches, keys, rng, cfg):
    """Random nodes along each traced branch, linked along the branch.

    Returns the graph plus the anchors chosen on the sampled chains.
    """
    g = _Graph()
    key_pos = {}
    for p, k in keys.items():
        key_pos.setdefault(k, []).append((p[1] + 0.5, p[0] + 0.5))
    next_id = max(keys.values(), default=-1) + 1
    for k, pts in key_pos.items():
        g.pos[k] = np.mean(pts, axis=0)
    degree = {}
    for a, b, _ in branches:
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
    g.junction = {k for k, d in degree.items() if d >= 3}
    anchors = set(key_pos)

    chains = []
    for ka, kb, path in branches:
        xy = np.array([(c + 0.5, r + 0.5) for r, c in path])
        # random placement: gaps drawn around the node stride
        idx = [0]
        while True:
            gap = int(rng.integers(max(1, cfg.node_stride // 2), cfg.node_stride + cfg.node_stride // 2 + 1))
            if idx[-1] + gap >= len(path) - 1:
                break
            idx.append(idx[-1] + gap)
        idx.append(len(path) - 1)
        ids = []
        for j, i in enumerate(idx):
            if j == 0:
                ids.append(ka)
            elif j == len(idx) - 1:
                ids.append(kb)
            else:
                g.pos[next_id] = xy[i]
                ids.append(next_id)
                next_id += 1
        # corners: nodes closest to Douglas-Peucker breakpoints of the pixel path
        if ka == kb:
            far = int(np.argmax(np.hypot(*(xy - xy[0]).T)))
            bp = _douglas_peucker(xy[: far + 1], cfg.dp_tol_px) + [
                far + i for i in _douglas_peucker(xy[far:], cfg.dp_tol_px)
            ]
        else:
            bp = _douglas_peucker(xy, cfg.dp_tol_px)
        idx_arr = np.array(idx)
        for b in bp:
            j = int(np.argmin(np.abs(idx_arr - b)))
            if 0 < j < len(ids) - 1:
                anchors.add(ids[j])
                g.pos[ids[j]] = xy[b]
        chains.append((ids, idx, xy))
    return g, anchors, chains


def _contract(g, anchors, chains, bitmap, cfg):
    """Merge non-anchor nodes into the nearest anchor along their chain."""
    out = _Graph()
    out.junction = set(g.junction)
    for a in anchors:
        out.pos[a] = g.pos[a]
    for ids, idx, xy in chains:
        apos = [j for j, n in enumerate(ids) if n in anchors]
        for s, e in zip(apos[:-1], apos[1:]):
            a, b = ids[s], ids[e]
            # consecutive sampled nodes must be joined by structure
            for j in range(s, e):
                if kernels.line_misses(bitmap, g.pos[ids[j]], g.pos[ids[j + 1]], cfg.dilate_px):
                    break
            else:
                pixels = [tuple(p) for p in xy[idx[s] : idx[e] + 1]]
                out.add_edge(a, b, pixels)
    return out


def _align(g, cfg):
    lines = {k: g.edge_line(k) for k in g.edges}
    new = {}
    for n in sorted(g.pos):
        inc = g.incident(n)
        if not inc:
            continue
        ls = [lines[k] for k in inc]
        distinct = any(_angle_between(ls[0][1], d) > cfg.corner_deg for _, d in ls[1:])
        if distinct:
            p = _intersect_lines(ls)
            if np.hypot(*(p - g.pos[n])) <= 3 * cfg.merge_px:
                new[n] = p
        else:
            c, d = ls[0] if len(ls) == 1 else (np.mean([l[0] for l in ls], axis=0), ls[0][1])
            v = g.pos[n] - c
            new[n] = c + d * float(v @ d)
    changed = any(np.hypot(*(new[n] - g.pos[n])) > 1e-6 for n in new)
    g.pos.update(new)
    return changed


def _demote_straight(g, cfg):
    """Remove degree-2 nodes whose two walls continue within ``corner_deg``."""
    changed = False
    for n in sorted(g.pos):
        if n in g.junction:
            continue
        inc = g.incident(n)
        if len(inc) != 2:
            continue
        (a1, b1), (a2, b2) = inc
        u = b1 if a1 == n else a1
        v = b2 if a2 == n else a2
        if u == v:
            continue
        d1 = g.pos[n] - g.pos[u]
        d2 = g.pos[v] - g.pos[n]
        if np.hypot(*d1) == 0 or np.hypot(*d2) == 0:
            continue
        turn = math.degrees(math.acos(np.clip(d1 @ d2 / (np.hypot(*d1) * np.hypot(*d2)), -1, 1)))
        if turn <= cfg.corner_deg:
            px = g.edges.pop(inc[0]) + g.edges.pop(inc[1])
            del g.pos[n]
            g.add_edge(u, v, px)
            changed = True
    return changed


def _collapse_short(g, cfg):
    """Contract edges shorter than ``2 * merge_px``.

    Thinning stops short of acute corners and bends a wall toward an oblique
    junction, leaving a stub a few pixels long. Real walls are longer than
    this; the following alignment pass puts the merged node on the
    intersection of the remaining walls.
    """
    limit = 2 * cfg.merge_px
    short = sorted(
        (float(np.hypot(*(g.pos[a] - g.pos[b]))), a, b) for a, b in g.edges
    )
    short = [(a, b) for d, a, b in short if d <= limit]
    if not short:
        return False
    mapping = {}

    def find(x):
        while mapping.get(x, x) != x:
            x = mapping[x]
        return x

    for a, b in short:
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        keep, drop = min(ra, rb), max(ra, rb)
        g.pos[keep] = (g.pos[keep] + g.pos[drop]) / 2
        if drop in g.junction:
            g.junction.add(keep)
        mapping[drop] = keep
    g.relabel({n: find(n) for n in mapping})
    return True


def _merge_close(g, cfg):
    ids = sorted(g.pos)
    if len(ids) < 2:
        return False
    pts = np.array([g.pos[i] for i in ids])
    from scipy.spatial import cKDTree

    pairs = sorted(cKDTree(pts).query_pairs(cfg.merge_px))
    if not pairs:
        return False
    parent = {i: i for i in ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in pairs:
        a, b = find(ids[i]), find(ids[j])
        if a != b:
            parent[max(a, b)] = min(a, b)  # lower index wins
    groups = {}
    for i in ids:
        groups.setdefault(find(i), []).append(i)
    mapping = {}
    for root, members in groups.items():
        if len(members) > 1:
            g.pos[root] = np.mean([g.pos[m] for m in members], axis=0)
            if any(m in g.junction for m in members):
                g.junction.add(root)
            for m in members:
                mapping[m] = root
    g.relabel(mapping)
    return True


def _reconnect(g, bitmap, cfg):
    """Link dangling endpoints to the nearest node ahead along their wall."""
    reach = 4.0 * cfg.node_stride
    for n in sorted(g.pos):
        nb = g.neighbours(n)
        if len(nb) != 1:
            continue
        d = g.pos[n] - g.pos[nb[0]]
        norm = np.hypot(*d)
        if norm == 0:
            continue
        d = d / norm
        best = None
        for m in sorted(g.pos):
            if m == n or m == nb[0] or (min(m, n), max(m, n)) in g.edges:
                continue
            v = g.pos[m] - g.pos[n]
            dist = np.hypot(*v)
            if 0 < dist <= reach and _angle_between(d, v / dist) <= cfg.corner_deg and v @ d > 0:
                if kernels.line_misses(bitmap, g.pos[n], g.pos[m], cfg.dilate_px) == 0:
                    if best is None or dist < best[0]:
                        best = (dist, m)
        if best is not None:
            g.add_edge(n, best[1], [tuple(g.pos[n]), tuple(g.pos[best[1]])])


def vectorize_structure(bitmap, config=None):
    """Vector graph ``(nodes, adjacency)`` of a structure bitmap.

    ``nodes`` are continuous pixel coordinates ``(x, y)`` with pixel
    ``(r, c)`` centered at ``(c + 0.5, r + 0.5)``.
    """
    cfg = config or VectorizeConfig()
    bits = np.asarray(getattr(bitmap, "bits", bitmap), dtype=np.uint8)
    if not bits.any():
        return np.zeros((0, 2)), np.zeros((0, 0), dtype=np.uint8)
    rng = np.random.default_rng(cfg.seed)
    keys, branches = _skeleton_branches(bits, cfg.spur_px)
    g0, anchors, chains = _initial_graph(branches, keys, rng, cfg)
    g = _contract(g0, anchors, chains, bits, cfg)
    history = [len(g.pos)]
    for _ in range(cfg.iterations):
        changed = _collapse_short(g, cfg)
        changed |= _align(g, cfg)
        changed |= _merge_close(g, cfg)
        changed |= _demote_straight(g, cfg)
        history.append(len(g.pos))
        if not changed:
            break
    _reconnect(g, bits, cfg)
    _align(g, cfg)
    # isolated nodes carry no structure
    used = sorted({i for k in g.edges for i in k})
    index = {n: i for i, n in enumerate(used)}
    nodes = np.array([g.pos[n] for n in used]).reshape(-1, 2)
    adj = adjacency_from_edges(len(used), [(index[a], index[b]) for a, b in g.edges])
    vectorize_structure.last_history = history
    return nodes, adj


def coverage(bits, nodes, adj, radius, stray_px=2.0):
    """(fraction of structure pixels within ``radius`` of an edge, stray pixel count).

    A stray pixel lies on a graph edge but farther than ``stray_px`` from any
    structure pixel.
    """
    bits = np.asarray(bits, dtype=bool)
    segs = [[*nodes[a], *nodes[b]] for a, b in edges_from_adjacency(adj)]
    if not segs:
        return (0.0 if bits.any() else 1.0), 0
    d = kernels.segment_distance_field(bits.shape, segs, radius + 2)
    covered = np.count_nonzero(bits & (d <= radius))
    line = d <= 0.5
    dist_to_struct = ndimage.distance_transform_edt(~bits)
    stray = int(np.count_nonzero(line & (dist_to_struct > stray_px)))
    return covered / max(1, np.count_nonzero(bits)), stray


# ---------------------------------------------------------------------------
# semantics


def _planar_faces(nodes, edges):
    """Bounded faces of a straight-line planar graph as node loops."""
    nbrs = {}
    for a, b in edges:
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)
    order = {}
    for v, ns in nbrs.items():
        ang = [math.atan2(nodes[u][1] - nodes[v][1], nodes[u][0] - nodes[v][0]) for u in ns]
        order[v] = [u for _, u in sorted(zip(ang, ns))]
    visited = set()
    faces = []
    for a, b in edges:
        for start in ((a, b), (b, a)):
            if start in visited:
                continue
            loop = []
            u, v = start
            while (u, v) not in visited:
                visited.add((u, v))
                loop.append(u)
                ring = order[v]
                k = ring.index(u)
                w = ring[(k - 1) % len(ring)]
                u, v = v, w
            pts = nodes[loop]
            area = 0.5 * float(np.dot(pts[:, 0], np.roll(pts[:, 1], -1)) - np.dot(np.roll(pts[:, 0], -1), pts[:, 1]))
            if area > 1e-9:
                faces.append((loop, area))
    return faces


def _split_edge(nodes, edges, key, pts):
    """Insert points (sorted along the edge) into edge ``key``; return their node ids."""
    a, b = key
    edges.discard(key)
    ids = []
    prev = a
    for p in pts:
        nodes.append(np.asarray(p, dtype=float))
        k = len(nodes) - 1
        ids.append(k)
        edges.add((min(prev, k), max(prev, k)))
        prev = k
    edges.add((min(prev, b), max(prev, b)))
    return ids


def _attach_opening(nodes, edges, pix_xy, min_gap):
    """Put an opening (pixel cloud) on its nearest collinear edge, splitting it."""
    centroid = pix_xy.mean(axis=0)
    best = None
    for key in edges:
        a, b = key
        pa, pb = nodes[a], nodes[b]
        d = pb - pa
        ll = float(d @ d)
        if ll == 0:
            continue
        t = float(np.clip((centroid - pa) @ d / ll, 0, 1))
        dist = float(np.hypot(*(centroid - (pa + t * d))))
        if best is None or dist < best[0]:
            best = (dist, key)
    if best is None or best[0] > 4.0:
        return None
    a, b = best[1]
    pa, pb = nodes[a], nodes[b]
    d = pb - pa
    length = float(np.hypot(*d))
    u = d / length
    s = (pix_xy - pa) @ u
    # openings always get their own nodes, strictly inside the wall edge
    lo = max(float(s.min()) - 0.5, min_gap)
    hi = min(float(s.max()) + 0.5, length - min_gap)
    if hi - lo < min_gap:
        return None
    p, q = _split_edge(nodes, edges, (a, b), [pa + u * lo, pa + u * hi])
    return p, q


def extract_semantics(grid, nodes_px, adjacency, min_room_px=12):
    """Attach rooms, doors and windows from ``grid`` to a vectorized graph.

    ``nodes_px`` are in pixel coordinates of ``grid``; the returned plan is in
    meters.
    """
    labels = grid.labels
    nodes = [np.asarray(p, dtype=float) for p in np.asarray(nodes_px).reshape(-1, 2)]
    edges = set(edges_from_adjacency(adjacency))
    doors, windows = [], []
    for lab in (L.FRONT_DOOR, L.INTERIOR_DOOR, L.BALCONY_DOOR, L.WINDOW):
        comp, n = ndimage.label(labels == lab, structure=np.ones((3, 3)))
        for k in range(1, n + 1):
            rr, cc = np.nonzero(comp == k)
            xy = np.stack([cc + 0.5, rr + 0.5], axis=1)
            seg = _attach_opening(nodes, edges, xy, min_gap=1.0)
            if seg is None:
                raise VectorizeError(f"opening label {lab} at pixel ({rr[0]}, {cc[0]}) has no wall edge")
            if lab == L.WINDOW:
                windows.append(seg)
            else:
                doors.append((seg, lab))

    pts = np.array(nodes).reshape(-1, 2)
    faces = _planar_faces(pts, sorted(edges))
    room_mask = np.isin(labels, sorted(L.ROOM_IDS))
    comp, n = ndimage.label(room_mask)
    face_votes = {}
    if n:
        dist = ndimage.distance_transform_edt(room_mask)
        for k in range(1, n + 1):
            m = comp == k
            size = int(m.sum())
            if size < min_room_px:
                continue
            flat = np.where(m, dist, -1).argmax()
            r, c = divmod(int(flat), labels.shape[1])
            p = (c + 0.5, r + 0.5)
            containing = [
                (area, fi)
                for fi, (loop, area) in enumerate(faces)
                if kernels.points_in_polygon(np.array([p[0]]), np.array([p[1]]), pts[loop, 0], pts[loop, 1])[0]
            ]
            if not containing:
                raise VectorizeError(f"room at pixel ({r}, {c}) is not enclosed by walls")
            fi = min(containing)[1]
            vals, counts = np.unique(labels[m], return_counts=True)
            votes = face_votes.setdefault(fi, {})
            for v, cnt in zip(vals.tolist(), counts.tolist()):
                votes[v] = votes.get(v, 0) + cnt
    rooms = []
    for fi in sorted(face_votes):
        votes = face_votes[fi]
        label = max(sorted(votes), key=lambda v: votes[v])
        rooms.append((faces[fi][0], label))

    world = grid.frame.to_world(pts) if len(pts) else pts
    adj = adjacency_from_edges(len(pts), edges)
    return VectorFloorPlan(world, adj, rooms, doors, windows)


def vectorize_grid(grid, config=None):
    """structure mask -> graph -> semantics, with the coverage check applied."""
    cfg = (config or VectorizeConfig()).validate()
    bmp = structure_mask(grid)
    nodes, adj = vectorize_structure(bmp, cfg)
    frac, stray = coverage(bmp.bits, nodes, adj, radius=2.0, stray_px=cfg.stray_px)
    if frac < cfg.cover_frac:
        raise VectorizeError(f"graph covers only {frac:.1%} of the structure pixels")
    if stray:
        raise VectorizeError(f"{stray} edge pixels run through empty space")
    return extract_semantics(grid, nodes, adj)
