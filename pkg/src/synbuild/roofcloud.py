"""Surface-uniform point sampling of roof faces at a fixed areal density."""

from dataclasses import dataclass

import numpy as np

from .geomcore import EPS_PLANE, face_area, newell_normal, triangulate_face
from .seeding import derive_seed, stream

DEFAULT_DENSITY = 50.0  # points per m^2


@dataclass(frozen=True)
class RoofPointCloud:
    points: np.ndarray
    density: float
    seed: int
    face_counts: tuple = ()

    def __len__(self):
        return len(self.points)


def apportion(quotas):
    """Largest-remainder rounding: integer counts summing to round(sum(quotas))."""
    q = np.asarray(quotas, dtype=float)
    if q.size == 0:
        return np.zeros(0, dtype=np.int64)
    base = np.floor(q).astype(np.int64)
    total = int(np.floor(q.sum() + 0.5))
    short = total - int(base.sum())
    if short > 0:
        frac = q - base
        order = np.lexsort((np.arange(q.size), -frac))  # largest remainder, then index
        base[order[:short]] += 1
    return base


def is_vertical(loop, tol=1e-9):
    return abs(newell_normal(loop)[2]) <= tol


def _sample_triangles(tris, count, rng):
    areas = np.array([0.5 * np.linalg.norm(np.cross(t[1] - t[0], t[2] - t[0])) for t in tris])
    pick = rng.choice(len(tris), size=count, p=areas / areas.sum())
    r1 = np.sqrt(rng.random(count))
    r2 = rng.random(count)
    t = np.stack(tris)[pick]
    return (1 - r1)[:, None] * t[:, 0] + (r1 * (1 - r2))[:, None] * t[:, 1] + (r1 * r2)[:, None] * t[:, 2]


def sample_roof(roof_faces, density=DEFAULT_DENSITY, seed=0, noise_sigma=0.0, skip_vertical=True):
    """Sample points uniformly over the given planar loops.

    Face counts come from largest-remainder apportionment of area x density.
    Vertical faces (chimney sides, dormer cheeks) are skipped by default since
    an airborne scan barely sees them. ``noise_sigma`` jitters along the face
    normal.
    """
    if density < 0:
        raise ValueError("density must be non-negative")
    faces = [np.asarray(f, dtype=float) for f in roof_faces]
    if skip_vertical:
        faces = [f for f in faces if not is_vertical(f)]
    areas = [face_area(f) for f in faces]
    if not faces or sum(areas) <= 0 or density == 0:
        return RoofPointCloud(np.zeros((0, 3)), float(density), int(seed), tuple(0 for _ in faces))
    counts = apportion([a * density for a in areas])
    chunks = []
    for k, (f, n) in enumerate(zip(faces, counts)):
        if n == 0:
            continue
        rng = stream(derive_seed(seed, k), "roof_face")
        pts = _sample_triangles(triangulate_face(f, EPS_PLANE), int(n), rng)
        if noise_sigma > 0:
            pts = pts + rng.normal(0.0, noise_sigma, size=(len(pts), 1)) * newell_normal(f)
        chunks.append(pts)
    pts = np.vstack(chunks) if chunks else np.zeros((0, 3))
    return RoofPointCloud(pts, float(density), int(seed), tuple(int(c) for c in counts))


def write_xyz(cloud, path):
    np.savetxt(path, np.asarray(cloud.points if hasattr(cloud, "points") else cloud), fmt="%.6f")
