"""Hot raster kernels.

Each public function dispatches to a numba loop kernel or to a vectorized
numpy equivalent (``SYNBUILD_DISABLE_NUMBA=1``). Both produce identical
results; ``tests/test_kernels.py`` checks that.

Raster convention used everywhere: arrays are ``[row, col]``; pixel
``(r, c)`` covers ``[c, c+1) x [r, r+1)`` in pixel space, so its center is
``(c + 0.5, r + 0.5)`` with x along columns and y along rows.
"""

import math

import numpy as np

from ._accel import njit, use_numba

# Relative tolerance for "point lies on polygon edge".
_ON_EDGE_EPS = 1e-9


# ---------------------------------------------------------------------------
# point in polygon (even-odd, boundary counts as inside)


@njit
def _pip_nb(px, py, vx, vy, out):
    n = vx.shape[0]
    for k in range(px.shape[0]):
        x = px[k]
        y = py[k]
        inside = False
        on_edge = False
        j = n - 1
        for i in range(n):
            xi = vx[i]
            yi = vy[i]
            xj = vx[j]
            yj = vy[j]
            dx = xj - xi
            dy = yj - yi
            seg = math.sqrt(dx * dx + dy * dy)
            cross = (x - xi) * dy - (y - yi) * dx
            if abs(cross) <= _ON_EDGE_EPS * max(seg, 1.0) * max(seg, 1.0):
                if (
                    min(xi, xj) - 1e-12 <= x <= max(xi, xj) + 1e-12
                    and min(yi, yj) - 1e-12 <= y <= max(yi, yj) + 1e-12
                ):
                    on_edge = True
                    break
            if (yi > y) != (yj > y):
                xcross = xi + (y - yi) * dx / dy
                if x < xcross:
                    inside = not inside
            j = i
        out[k] = on_edge or inside


def _pip_np(px, py, vx, vy):
    px = px[:, None]
    py = py[:, None]
    xi = vx[None, :]
    yi = vy[None, :]
    xj = np.roll(vx, 1)[None, :]
    yj = np.roll(vy, 1)[None, :]
    dx = xj - xi
    dy = yj - yi
    seg = np.maximum(np.hypot(dx, dy), 1.0)
    cross = (px - xi) * dy - (py - yi) * dx
    on = (
        (np.abs(cross) <= _ON_EDGE_EPS * seg * seg)
        & (px >= np.minimum(xi, xj) - 1e-12)
        & (px <= np.maximum(xi, xj) + 1e-12)
        & (py >= np.minimum(yi, yj) - 1e-12)
        & (py <= np.maximum(yi, yj) + 1e-12)
    )
    straddle = (yi > py) != (yj > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = xi + (py - yi) * dx / np.where(dy == 0, 1.0, dy)
    hits = straddle & (px < xcross)
    inside = (hits.sum(axis=1) % 2) == 1
    return on.any(axis=1) | inside


def points_in_polygon(px, py, vx, vy):
    """Vectorized even-odd membership; points on the boundary are inside."""
    px = np.ascontiguousarray(px, dtype=np.float64).ravel()
    py = np.ascontiguousarray(py, dtype=np.float64).ravel()
    vx = np.ascontiguousarray(vx, dtype=np.float64)
    vy = np.ascontiguousarray(vy, dtype=np.float64)
    if use_numba():
        out = np.zeros(px.shape[0], dtype=np.bool_)
        _pip_nb(px, py, vx, vy, out)
        return out
    if px.size == 0:
        return np.zeros(0, dtype=bool)
    out = np.empty(px.shape[0], dtype=bool)
    chunk = max(1, 2_000_000 // max(vx.size, 1))
    for s in range(0, px.size, chunk):
        out[s : s + chunk] = _pip_np(px[s : s + chunk], py[s : s + chunk], vx, vy)
    return out


# ---------------------------------------------------------------------------
# nearest-neighbour transform and the alignment loss


@njit
def _transform_nb(src, tx, ty, sx, sy, cx, cy, out):
    h_in, w_in = src.shape
    h_out, w_out = out.shape
    for r in range(h_out):
        ys = cy + (r + 0.5 - ty - cy) / sy
        rs = int(math.floor(ys))
        if rs < 0 or rs >= h_in:
            continue
        for c in range(w_out):
            xs = cx + (c + 0.5 - tx - cx) / sx
            cs = int(math.floor(xs))
            if 0 <= cs < w_in and src[rs, cs]:
                out[r, c] = 1


def _source_index(n_out, n_in, t, s, center):
    coords = center + (np.arange(n_out) + 0.5 - t - center) / s
    idx = np.floor(coords).astype(np.int64)
    valid = (idx >= 0) & (idx < n_in)
    return np.clip(idx, 0, n_in - 1), valid


def _transform_np(src, tx, ty, sx, sy, cx, cy, out_shape):
    h_out, w_out = out_shape
    rows, rvalid = _source_index(h_out, src.shape[0], ty, sy, cy)
    cols, cvalid = _source_index(w_out, src.shape[1], tx, sx, cx)
    out = src[np.ix_(rows, cols)].astype(np.uint8)
    out &= rvalid[:, None].astype(np.uint8)
    out &= cvalid[None, :].astype(np.uint8)
    return out


def transform_nearest(src, tx, ty, sx, sy, cx, cy, out_shape):
    """Resample ``src`` scaled by (sx, sy) about (cx, cy), then shifted by (tx, ty).

    Inverse mapping with nearest-neighbour lookup; output pixels whose
    pre-image falls outside ``src`` are zero.
    """
    src = np.ascontiguousarray(src, dtype=np.uint8)
    if use_numba():
        out = np.zeros(out_shape, dtype=np.uint8)
        _transform_nb(src, float(tx), float(ty), float(sx), float(sy), float(cx), float(cy), out)
        return out
    return _transform_np(src, tx, ty, sx, sy, cx, cy, out_shape)


@njit
def _loss_nb(fp, plan, fp_ones, fp_below, tx, ty, sx, sy, cx, cy, r_lo, r_hi, c_lo, c_hi, weight, bound):
    # Only output pixels inside the image of the plan's bounding box can be set.
    # With bound >= 0 the scan stops once a lower bound on the loss exceeds it;
    # fp_below[r] counts footprint ones in rows >= r.
    h, w = fp.shape
    hp, wp = plan.shape
    ylo = cy + (r_lo - cy) * sy + ty
    yhi = cy + (r_hi + 1 - cy) * sy + ty
    xlo = cx + (c_lo - cx) * sx + tx
    xhi = cx + (c_hi + 1 - cx) * sx + tx
    r0 = max(0, int(math.floor(ylo)) - 1)
    r1 = min(h, int(math.ceil(yhi)) + 1)
    c0 = max(0, int(math.floor(xlo)) - 1)
    c1 = min(w, int(math.ceil(xhi)) + 1)
    # source column of every output column, computed once per call
    cols = np.empty(max(c1 - c0, 0), dtype=np.int64)
    for c in range(c0, c1):
        xs = cx + (c + 0.5 - tx - cx) / sx
        cs = int(math.floor(xs))
        cols[c - c0] = cs if 0 <= cs < wp else -1
    covered = 0
    overlap = 0
    for r in range(r0, r1):
        ys = cy + (r + 0.5 - ty - cy) / sy
        rs = int(math.floor(ys))
        if rs < 0 or rs >= hp:
            continue
        for c in range(c0, c1):
            cs = cols[c - c0]
            if cs >= 0 and plan[rs, cs]:
                covered += 1
                if fp[r, c]:
                    overlap += 1
        if bound >= 0:
            lb = covered - overlap + weight * max(0, fp_ones - overlap - fp_below[r + 1])
            if lb > bound:
                return lb
    return weight * (fp_ones - overlap) + (covered - overlap)


def _loss_np(fp, plan, tx, ty, sx, sy, cx, cy, weight):
    moved = _transform_np(plan, tx, ty, sx, sy, cx, cy, fp.shape).astype(bool)
    fpb = fp.astype(bool)
    coverage = int(np.count_nonzero(fpb & ~moved))
    overhang = int(np.count_nonzero(moved & ~fpb))
    return weight * coverage + overhang


class LossEvaluator:
    """Evaluates the weighted coverage/overhang loss for many transforms of one pair."""

    def __init__(self, footprint, plan, weight=20):
        self.fp = np.ascontiguousarray(footprint, dtype=np.uint8)
        self.plan = np.ascontiguousarray(plan, dtype=np.uint8)
        self.weight = int(weight)
        self.fp_ones = int(np.count_nonzero(self.fp))
        per_row = np.count_nonzero(self.fp, axis=1)
        self.fp_below = np.concatenate([np.cumsum(per_row[::-1])[::-1], [0]]).astype(np.int64)
        rows, cols = np.nonzero(self.plan)
        if rows.size:
            self.bbox = (int(rows.min()), int(rows.max()), int(cols.min()), int(cols.max()))
            self.center = (float(cols.mean()) + 0.5, float(rows.mean()) + 0.5)
        else:
            self.bbox = (0, -1, 0, -1)
            self.center = (self.plan.shape[1] / 2.0, self.plan.shape[0] / 2.0)

    def __call__(self, tx, ty, sx, sy, bound=None):
        """Exact loss, or with ``bound`` possibly only a lower bound that exceeds it."""
        cx, cy = self.center
        if use_numba():
            r_lo, r_hi, c_lo, c_hi = self.bbox
            return int(
                _loss_nb(
                    self.fp, self.plan, self.fp_ones, self.fp_below, float(tx), float(ty), float(sx), float(sy),
                    cx, cy, r_lo, r_hi, c_lo, c_hi, self.weight, -1 if bound is None else int(bound),
                )
            )
        return _loss_np(self.fp, self.plan, tx, ty, sx, sy, cx, cy, self.weight)


# ---------------------------------------------------------------------------
# distance from pixel centers to segments (wall painting)


@njit
def _seg_dist_nb(h, w, segs, reach, out):
    for k in range(segs.shape[0]):
        x0 = segs[k, 0]
        y0 = segs[k, 1]
        x1 = segs[k, 2]
        y1 = segs[k, 3]
        dx = x1 - x0
        dy = y1 - y0
        ll = dx * dx + dy * dy
        c0 = max(0, int(math.floor(min(x0, x1) - reach)) - 1)
        c1 = min(w, int(math.ceil(max(x0, x1) + reach)) + 1)
        r0 = max(0, int(math.floor(min(y0, y1) - reach)) - 1)
        r1 = min(h, int(math.ceil(max(y0, y1) + reach)) + 1)
        for r in range(r0, r1):
            py = r + 0.5
            for c in range(c0, c1):
                px = c + 0.5
                if ll > 0.0:
                    t = ((px - x0) * dx + (py - y0) * dy) / ll
                    t = min(1.0, max(0.0, t))
                else:
                    t = 0.0
                ex = px - (x0 + t * dx)
                ey = py - (y0 + t * dy)
                d = math.sqrt(ex * ex + ey * ey)
                if d < out[r, c]:
                    out[r, c] = d


def _seg_dist_np(h, w, segs, reach, out):
    for x0, y0, x1, y1 in segs:
        c0 = max(0, int(math.floor(min(x0, x1) - reach)) - 1)
        c1 = min(w, int(math.ceil(max(x0, x1) + reach)) + 1)
        r0 = max(0, int(math.floor(min(y0, y1) - reach)) - 1)
        r1 = min(h, int(math.ceil(max(y0, y1) + reach)) + 1)
        if c1 <= c0 or r1 <= r0:
            continue
        py, px = np.mgrid[r0:r1, c0:c1].astype(np.float64) + 0.5
        dx, dy = x1 - x0, y1 - y0
        ll = dx * dx + dy * dy
        t = np.clip(((px - x0) * dx + (py - y0) * dy) / ll, 0.0, 1.0) if ll > 0 else 0.0
        d = np.hypot(px - (x0 + t * dx), py - (y0 + t * dy))
        np.minimum(out[r0:r1, c0:c1], d, out=out[r0:r1, c0:c1])


def segment_distance_field(shape, segments, reach):
    """Per-pixel distance to the nearest segment, ``inf`` beyond ``reach``.

    ``segments`` is an (n, 4) array of ``x0, y0, x1, y1`` in pixel space.
    """
    h, w = shape
    segs = np.ascontiguousarray(np.asarray(segments, dtype=np.float64).reshape(-1, 4))
    out = np.full((h, w), np.inf)
    if use_numba():
        _seg_dist_nb(h, w, segs, float(reach), out)
    else:
        _seg_dist_np(h, w, segs, float(reach), out)
    return out


# ---------------------------------------------------------------------------
# straight-line support test


@njit
def _line_misses_nb(bmp, x0, y0, x1, y1, dilate):
    h, w = bmp.shape
    length = math.sqrt((x1 - x0) ** 2 + (y1 - y0) ** 2)
    steps = max(1, int(math.ceil(length * 2.0)))
    misses = 0
    last_r = -1
    last_c = -1
    for k in range(steps + 1):
        t = k / steps
        c = int(math.floor(x0 + t * (x1 - x0)))
        r = int(math.floor(y0 + t * (y1 - y0)))
        if r == last_r and c == last_c:
            continue
        last_r = r
        last_c = c
        hit = False
        for dr in range(-dilate, dilate + 1):
            for dc in range(-dilate, dilate + 1):
                rr = r + dr
                cc = c + dc
                if 0 <= rr < h and 0 <= cc < w and bmp[rr, cc]:
                    hit = True
        if not hit:
            misses += 1
    return misses


def _line_misses_np(bmp, x0, y0, x1, y1, dilate):
    h, w = bmp.shape
    length = math.hypot(x1 - x0, y1 - y0)
    steps = max(1, int(math.ceil(length * 2.0)))
    t = np.arange(steps + 1) / steps
    c = np.floor(x0 + t * (x1 - x0)).astype(np.int64)
    r = np.floor(y0 + t * (y1 - y0)).astype(np.int64)
    keep = np.ones(r.size, dtype=bool)
    keep[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
    r, c = r[keep], c[keep]
    pad = np.pad(bmp.astype(bool), dilate)
    hit = np.zeros(r.size, dtype=bool)
    for dr in range(-dilate, dilate + 1):
        for dc in range(-dilate, dilate + 1):
            rr = r + dr + dilate
            cc = c + dc + dilate
            ok = (rr >= 0) & (rr < h + 2 * dilate) & (cc >= 0) & (cc < w + 2 * dilate)
            hit[ok] |= pad[rr[ok], cc[ok]]
    return int(np.count_nonzero(~hit))


def line_misses(bmp, p0, p1, dilate=1):
    """Count pixels along the segment p0-p1 with no structure within ``dilate`` px."""
    bmp = np.ascontiguousarray(bmp, dtype=np.uint8)
    x0, y0 = float(p0[0]), float(p0[1])
    x1, y1 = float(p1[0]), float(p1[1])
    if use_numba():
        return int(_line_misses_nb(bmp, x0, y0, x1, y1, int(dilate)))
    return _line_misses_np(bmp, x0, y0, x1, y1, int(dilate))
