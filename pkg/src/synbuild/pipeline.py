"""End-to-end generation: exterior -> floor plans -> vectors -> alignment ->
stackings -> assembled buildings -> records.

Each exterior is an independent task whose seed depends only on the global
seed and its index, so outputs do not depend on the worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
import time

import numpy as np

from . import labels as L
from .align import AlignmentError, optimize_alignment, plan_center
from .assemble import (
    AssemblyError,
    apply_alignment,
    enumerate_stackings,
    extrude_floor,
    floor_classes,
    floor_contiguous,
    snap_to_footprint,
    stack_floors,
)
from .exterior import decompose_floors, generate_exterior
from .floorplan import generate_floorplan, place_front_door
from .geomcore import GeometryError, rasterize_polygon
from .quality import building_report, check_semantic_coverage, plan_report
from .records import build_record, emit_record, write_plan_images
from .roofcloud import sample_roof
from .seeding import derive_seed
from .vectorize import VectorizeConfig, vectorize_grid

log = logging.getLogger("synbuild")


@dataclass
class RunReport:
    exteriors_attempted: int = 0
    exteriors_retained: int = 0
    candidates_attempted: int = 0
    candidates_retained: int = 0
    buildings_attempted: int = 0
    buildings_emitted: int = 0
    rejections: dict = field(default_factory=dict)  # stage -> count
    paths: list = field(default_factory=list)

    def reject(self, stage, n=1):
        self.rejections[stage] = self.rejections.get(stage, 0) + n

    def merge(self, other):
        for f in ("exteriors_attempted", "exteriors_retained", "candidates_attempted", "candidates_retained",
                  "buildings_attempted", "buildings_emitted"):
            setattr(self, f, getattr(self, f) + getattr(other, f))
        for k, v in other.rejections.items():
            self.reject(k, v)
        self.paths.extend(other.paths)
        return self

    def summary(self):
        def ratio(a, b):
            return a / b if b else 0.0

        return {
            "exteriors_attempted": self.exteriors_attempted,
            "exteriors_retained": self.exteriors_retained,
            "exterior_retention": round(ratio(self.exteriors_retained, self.exteriors_attempted), 4),
            "candidates_attempted": self.candidates_attempted,
            "candidates_retained": self.candidates_retained,
            "candidate_retention": round(ratio(self.candidates_retained, self.candidates_attempted), 4),
            "buildings_attempted": self.buildings_attempted,
            "buildings_emitted": self.buildings_emitted,
            "rejections": dict(sorted(self.rejections.items())),
        }


def exterior_seed(global_seed, index):
    return derive_seed(global_seed, "exterior", index)


def exterior_name(index):
    return f"{index:05d}"


def _plan_bitmap(labels):
    return ((labels != 0) & (labels != L.EXTERNAL)).astype(np.uint8)


def make_candidate(cfg, footprint, seed, plan_id, report):
    """One floor-plan candidate through generation, vectorization, checks and alignment.

    Returns ``(aligned plan, grid, coverage result)`` or None when rejected.
    """
    report.candidates_attempted += 1
    try:
        door = place_front_door(footprint, seed, cfg.floorplan.front_door_width_m)
        cand = generate_floorplan(footprint, door, seed, cfg.floorplan, candidate_id=plan_id)
    except GeometryError as e:
        report.reject("floorplan")
        log.debug("candidate %s: floorplan failed: %s", plan_id, e)
        return None
    grid = cand.grid
    try:
        vcfg = VectorizeConfig(**{**cfg.vectorize.__dict__, "seed": derive_seed(seed, "vectorize") & 0xFFFFFFFF})
        plan = vectorize_grid(grid, vcfg)
    except GeometryError as e:
        report.reject("vectorize")
        log.debug("candidate %s: vectorize failed: %s", plan_id, e)
        return None
    fp_bmp = rasterize_polygon(footprint, grid.scale, frame=grid.frame)
    q = plan_report(plan, grid, fp_bmp)
    if not q.passed:
        report.reject("quality_" + q.failed()[0])
        return None
    coverage = check_semantic_coverage(grid, fp_bmp)
    plan_bmp = _plan_bitmap(grid.labels)
    try:
        t, _ = optimize_alignment(fp_bmp.bits, plan_bmp, cfg.align)
    except AlignmentError:
        report.reject("alignment")
        return None
    aligned = apply_alignment(plan, t, plan_center(plan_bmp), grid.frame)
    aligned = snap_to_footprint(aligned, footprint, cfg.assemble.snap_px * grid.scale)
    q = plan_report(aligned)
    q.record("SemanticCoverage", *coverage)
    if not q.passed:
        report.reject("quality_after_alignment_" + q.failed()[0])
        return None
    report.candidates_retained += 1
    return aligned, grid, coverage


def _shift(plan, dx, dy):
    from .vectorize import VectorFloorPlan

    if dx == 0 and dy == 0:
        return plan
    return VectorFloorPlan(plan.nodes + np.array([dx, dy]), plan.adjacency, plan.rooms, plan.doors, plan.windows)


def process_exterior(cfg, index):
    """All buildings of one exterior; returns a RunReport (records are written here)."""
    report = RunReport(exteriors_attempted=1)
    seed = exterior_seed(cfg.global_seed, index)
    name = exterior_name(index)
    try:
        hull = generate_exterior(seed, cfg.exterior)
    except GeometryError:
        report.reject("exterior")
        return report
    floors = decompose_floors(hull)
    footprints = [fp for fp, _, _ in floors]
    classes = floor_classes(footprints)

    plans, grids, coverage = {}, {}, {}
    by_class = {}
    for f, fp in enumerate(footprints):
        by_class.setdefault(classes[f], [])
        for c in range(cfg.candidates_per_floor):
            pid = f"{name}_f{f}_c{c}"
            out = make_candidate(cfg, fp, derive_seed(seed, f, c), pid, report)
            if out is None:
                continue
            plans[pid], grids[pid], coverage[pid] = out[0], out[1], out[2]
            by_class[classes[f]].append((pid, f))

    if any(not v for v in by_class.values()):
        report.reject("no_valid_plan_for_floor_class")
        return report
    origin = {f: fp.array.min(axis=0) for f, fp in enumerate(footprints)}
    try:
        orders = enumerate_stackings({k: [p for p, _ in v] for k, v in by_class.items()}, classes,
                                     cfg.permutation_cap, seed)
    except AssemblyError:
        report.reject("stacking")
        return report
    home = {p: f for v in by_class.values() for p, f in v}

    roof = sample_roof(hull.roof_loops(), cfg.roof.density, derive_seed(seed, "roof"), cfg.roof.noise_sigma)
    frames = {pid: g.frame for pid, g in grids.items()}
    used = set()
    for order in orders:
        report.buildings_attempted += 1
        try:
            units = []
            for k, ((fp, z0, z1), pid) in enumerate(zip(floors, order.plan_ids)):
                d = origin[k] - origin[home[pid]]
                units.append(extrude_floor(_shift(plans[pid], d[0], d[1]), z0, z1, cfg.assemble, pid, fp))
            building = stack_floors(hull, units, cfg.assemble.eps_merge)
        except GeometryError as e:
            report.reject("assembly")
            log.debug("exterior %s order %s: %s", name, order.plan_ids, e)
            continue
        q = building_report(building, coverage)
        ok = floor_contiguous(building)
        q.record("FloorContiguity", ok, [] if ok else [(("floors",), "floors not contiguous")])
        if not q.passed:
            report.reject("building_" + q.failed()[0])
            continue
        record = build_record(building, roof, frames)
        report.paths.append(str(emit_record(record, cfg.output_root, name)))
        report.buildings_emitted += 1
        used.update(order.plan_ids)
    for pid in sorted(used):
        write_plan_images(cfg.output_root, pid, grids[pid].labels)
    if report.buildings_emitted:
        report.exteriors_retained = 1
    return report


def _task(args):
    cfg, index = args
    return process_exterior(cfg, index)


def run_generate(cfg, progress=None):
    """Generate ``cfg.exterior_count`` exteriors; returns the merged RunReport."""
    started = time.perf_counter()
    total = RunReport()
    jobs = [(cfg, i) for i in range(cfg.exterior_count)]
    if cfg.worker_count == 1:
        results = map(_task, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=cfg.worker_count)
        results = pool.map(_task, jobs)
    try:
        for i, r in enumerate(results):
            total.merge(r)
            if progress:
                progress(i + 1, cfg.exterior_count, r)
    finally:
        if cfg.worker_count != 1:
            pool.shutdown()
    total.paths.sort()
    log.info("generated %d buildings in %.1fs", total.buildings_emitted, time.perf_counter() - started)
    return total
