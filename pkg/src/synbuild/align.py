"""Fit a floor-plan bitmap onto a footprint bitmap by translation and axis scaling.

The loss weighs uncovered footprint pixels 20 times heavier than plan pixels
spilling outside the footprint. It is an integer step function of the
transform, so the search is a coarse lattice scan followed by a pattern
search whose steps shrink to subpixel translations.
"""

from dataclasses import dataclass
import itertools

import numpy as np

from . import kernels
from .geomcore import BinaryBitmap, GeometryError

COVERAGE_WEIGHT = 20


class AlignmentError(GeometryError):
    pass


@dataclass(frozen=True, order=True)
class AlignmentTransform:
    t_x: float = 0.0
    t_y: float = 0.0
    s_x: float = 1.0
    s_y: float = 1.0

    def check(self, bounds=(0.8, 1.25)):
        lo, hi = bounds
        for s in (self.s_x, self.s_y):
            if not (s > 0 and lo - 1e-12 <= s <= hi + 1e-12):
                raise AlignmentError(f"scale {s} outside [{lo}, {hi}]")
        return self

    def key(self):
        return (self.t_x, self.t_y, self.s_x, self.s_y)


IDENTITY = AlignmentTransform()


def _bits(b):
    return np.asarray(getattr(b, "bits", b), dtype=np.uint8)


def plan_center(plan):
    """Centroid of the ones, in continuous pixel coordinates (x, y)."""
    rows, cols = np.nonzero(_bits(plan))
    if rows.size == 0:
        h, w = _bits(plan).shape
        return w / 2.0, h / 2.0
    return float(cols.mean()) + 0.5, float(rows.mean()) + 0.5


def transform_bitmap(bmp, t, out_size=None):
    """Nearest-neighbour resample of ``bmp``: scale about its centroid, then shift."""
    src = _bits(bmp)
    shape = tuple(out_size) if out_size is not None else src.shape
    cx, cy = plan_center(src)
    out = kernels.transform_nearest(src, t.t_x, t.t_y, t.s_x, t.s_y, cx, cy, shape)
    return BinaryBitmap(out, getattr(bmp, "frame", None))


def transform_points(points, t, center):
    """Apply the bitmap transform to continuous pixel coordinates."""
    p = np.asarray(points, dtype=float)
    cx, cy = center
    return np.stack([cx + t.s_x * (p[..., 0] - cx) + t.t_x, cy + t.s_y * (p[..., 1] - cy) + t.t_y], -1)


def alignment_loss(footprint, plan, t):
    fp = _bits(footprint)
    return int(kernels.LossEvaluator(fp, _bits(plan), COVERAGE_WEIGHT)(t.t_x, t.t_y, t.s_x, t.s_y))


@dataclass(frozen=True)
class SearchConfig:
    window_px: int = 16
    coarse_stride: int = 4
    scales: tuple = (0.85, 0.9, 0.95, 1.0, 1.05, 1.1, 1.15, 1.2, 1.25)
    fine_scale_step: float = 0.01
    fine_scale_span: float = 0.03
    descent_scale_step: float = 0.005
    refine_levels: int = 6
    scale_bounds: tuple = (0.8, 1.25)
    reject_fraction: float = 0.15

    def validate(self):
        lo, hi = self.scale_bounds
        if not 0 < lo <= 1 <= hi:
            raise ValueError("scale_bounds must bracket 1")
        if self.window_px < 0 or self.coarse_stride < 1:
            raise ValueError("window_px must be >= 0 and coarse_stride >= 1")
        return self


class _Search:
    def __init__(self, footprint, plan, cfg):
        self.f = kernels.LossEvaluator(_bits(footprint), _bits(plan), COVERAGE_WEIGHT)
        self.cfg = cfg
        self.cache = {}
        self.best = None

    def clamp(self, s):
        lo, hi = self.cfg.scale_bounds
        return round(min(hi, max(lo, s)), 6)

    def __call__(self, tx, ty, sx, sy, bound=None):
        # cache holds (value, exact); an inexact value is a lower bound above some earlier bound
        key = (round(float(tx), 6), round(float(ty), 6), self.clamp(sx), self.clamp(sy))
        hit = self.cache.get(key)
        if hit is None or not (hit[1] or (bound is not None and hit[0] > bound)):
            v = self.f(*key, bound=bound)
            hit = self.cache[key] = (v, bound is None or v <= bound)
        if hit[1]:
            val = (hit[0], key)
            if self.best is None or val < self.best:
                self.best = val
        return hit[0]

    def bound(self):
        return None if self.best is None else self.best[0]


def _moment_guess(fp, pl, clamp):
    """Shift and per-axis scale that match the centroid and spread of the ones."""
    def moments(b):
        rows, cols = np.nonzero(b)
        return cols.mean() + 0.5, rows.mean() + 0.5, cols.std(), rows.std()

    fx, fy, fsx, fsy = moments(fp)
    px, py, psx, psy = moments(pl)
    sx = clamp(fsx / psx) if psx > 0 else 1.0
    sy = clamp(fsy / psy) if psy > 0 else 1.0
    return (round(fx - px, 3), round(fy - py, 3), sx, sy)


def _pattern_search(s, start, cfg):
    """Descend from ``start`` with shrinking steps; translations go subpixel.

    Shift and scale along one axis move together, since shrinking about a
    slightly misplaced centroid uncovers one side first.
    """
    best = (s(*start), tuple(start))
    t_step, s_step = 1.0, cfg.descent_scale_step
    for _ in range(cfg.refine_levels):
        moves = [
            (a * t_step, b * t_step, c * s_step, d * s_step)
            for a, b, c, d in itertools.product((-1, 0, 1), repeat=4)
            if a or b or c or d
        ]
        while True:
            cur = best[1]
            for d in moves:
                nxt = tuple(round(c + e, 6) for c, e in zip(cur, d))
                nxt = (nxt[0], nxt[1], s.clamp(nxt[2]), s.clamp(nxt[3]))
                best = min(best, (s(*nxt, bound=best[0]), nxt))
            if best[1] == cur:
                break
        t_step, s_step = t_step / 2, s_step / 2
    return best


def optimize_alignment(footprint, plan, config=None):
    """Best transform found and its loss.

    Ties are broken toward the lexicographically smallest ``(t_x, t_y, s_x, s_y)``.
    Raises AlignmentError when the loss exceeds the rejection threshold.
    """
    cfg = (config or SearchConfig()).validate()
    fp, pl = _bits(footprint), _bits(plan)
    if not fp.any() or not pl.any():
        raise AlignmentError("empty bitmap")
    s = _Search(fp, pl, cfg)
    s(0, 0, 1, 1)
    # start from the centroid offset so large misplacements stay inside the window
    pcx, pcy = plan_center(pl)
    fcx, fcy = plan_center(fp)
    ox, oy = round(fcx - pcx), round(fcy - pcy)
    w, st = cfg.window_px, cfg.coarse_stride
    scales = [sc for sc in cfg.scales if cfg.scale_bounds[0] <= sc <= cfg.scale_bounds[1]]
    shifts = range(-w, w + 1, st)
    for dx, dy, sx, sy in itertools.product(shifts, shifts, scales, scales):
        s(ox + dx, oy + dy, sx, sy, bound=s.bound())

    # fine pass around the coarse winner
    _, (bx, by, bsx, bsy) = s.best
    fs = np.arange(-cfg.fine_scale_span, cfg.fine_scale_span + 1e-9, cfg.fine_scale_step)
    half = st // 2 + 1
    for dx, dy in itertools.product(range(-half, half + 1), repeat=2):
        for ds_x, ds_y in itertools.product(fs, fs):
            s(bx + dx, by + dy, bsx + ds_x, bsy + ds_y, bound=s.bound())

    starts = [s.best[1], _moment_guess(fp, pl, s.clamp)]
    results = [_pattern_search(s, start, cfg) for start in starts]
    s.best = min(results)
    loss, (tx, ty, sx, sy) = s.best
    t = AlignmentTransform(tx, ty, sx, sy)
    threshold = cfg.reject_fraction * np.count_nonzero(fp) * COVERAGE_WEIGHT
    if loss > threshold:
        raise AlignmentError(f"alignment loss {loss} above threshold {threshold:.0f}")
    return t, int(loss)
