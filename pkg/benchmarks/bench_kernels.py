"""Numba vs numpy timings for the raster kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each path runs in its own interpreter because the switch
(SYNBUILD_DISABLE_NUMBA) is read at import time. JIT compilation is paid
in a warm-up call and excluded from the numbers.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def workloads():
    from synbuild import kernels as K
    from synbuild.align import AlignmentTransform, optimize_alignment, transform_bitmap
    from synbuild.exterior import generate_exterior
    from synbuild.geomcore import rasterize_polygon

    rng = np.random.default_rng(0)
    fp = generate_exterior(3).floor_footprints[0]
    F = rasterize_polygon(fp, 0.1, 256).bits
    P = transform_bitmap(F, AlignmentTransform(3.5, -2.5, 1.08, 0.94)).bits
    ev = K.LossEvaluator(F, P)
    transforms = [(rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(0.85, 1.2), rng.uniform(0.85, 1.2))
                  for _ in range(200)]
    segs = rng.uniform(0, 256, (120, 4))
    verts = fp.array
    xs, ys = np.meshgrid(np.linspace(-1, 20, 256), np.linspace(-1, 20, 256))
    lines = rng.uniform(0, 256, (400, 4))

    return {
        "points_in_polygon 65k pts": lambda: K.points_in_polygon(xs, ys, verts[:, 0], verts[:, 1]),
        "transform_nearest 256^2 x20": lambda: [K.transform_nearest(P, *t, 128, 128, (256, 256)) for t in transforms[:20]],
        "alignment loss x200": lambda: [ev(*t) for t in transforms],
        "segment_distance 120 segs": lambda: K.segment_distance_field((256, 256), segs, 4.0),
        "line_misses x400": lambda: [K.line_misses(F, l[:2], l[2:]) for l in lines],
        "optimize_alignment 256^2": lambda: optimize_alignment(F, P),
    }


def measure(repeat):
    from synbuild import _accel

    out = {"numba": _accel.NUMBA_AVAILABLE, "times": {}}
    for name, fn in workloads().items():
        fn()  # warm-up / compile
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out["times"][name] = best
    return out


def run_child(disable, repeat):
    env = dict(os.environ)
    env.pop("SYNBUILD_DISABLE_NUMBA", None)
    if disable:
        env["SYNBUILD_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(measure(args.repeat)))
        return
    fast = run_child(False, args.repeat)
    slow = run_child(True, args.repeat)
    if not fast["numba"]:
        print("numba is not importable; both columns use numpy")
    print(f"{'kernel':32s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, t_fast in fast["times"].items():
        t_slow = slow["times"][name]
        print(f"{name:32s} {t_fast:10.4f} {t_slow:10.4f} {t_slow / t_fast:7.1f}x")


if __name__ == "__main__":
    main()
