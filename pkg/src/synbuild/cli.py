"""Command line interface.

Exit codes: 0 success, 1 validation failure (or nothing produced), 2 bad
configuration or arguments.
"""

import argparse
import json
import logging
import os
import shutil
import sys
from pathlib import Path

import numpy as np

from .config import OUT_ENV, ConfigError, load
from .records import (
    MASK_DIR,
    VIS_DIR,
    RecordValidationError,
    exterior_of,
    export_obj,
    find_records,
    load_record,
)

EXIT_OK, EXIT_INVALID, EXIT_CONFIG = 0, 1, 2
STREAM_NAMES = ("building", "window", "door", "roof")


def _common(p):
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--out", help=f"output root (falls back to ${OUT_ENV})")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    ap = argparse.ArgumentParser(prog="synbuild", description="Synthetic multi-floor building wireframes.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate building records")
    _common(g)
    g.add_argument("--seed", type=int, help="global seed")
    g.add_argument("--exteriors", type=int, help="number of exteriors")
    g.add_argument("--workers", type=int, help="worker processes")
    g.add_argument("--permutation-cap", type=int, help="max stacking orders per exterior")
    g.add_argument("--candidates-per-floor", type=int, help="floor-plan candidates per floor")

    v = sub.add_parser("validate", help="check every record under a root")
    _common(v)
    v.add_argument("root", nargs="?", help="output root or a record file")
    v.add_argument("--no-images", action="store_true", help="skip the pixel coverage check")

    s = sub.add_parser("stats", help="dataset statistics")
    _common(s)
    s.add_argument("root", nargs="?")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output", help="write here instead of stdout")

    e = sub.add_parser("export-obj", help="write wireframes as OBJ")
    _common(e)
    e.add_argument("inputs", nargs="*", help="record files or roots")
    e.add_argument("--dest", help="directory for .obj files (default: next to each record)")
    e.add_argument("--streams", default=",".join(STREAM_NAMES), help="comma-separated subset of " + ",".join(STREAM_NAMES))

    r = sub.add_parser("sample-for-review", help="copy a random sample of records for manual inspection")
    _common(r)
    r.add_argument("root", nargs="?")
    r.add_argument("-n", type=int, default=20)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--dest", required=True)
    return ap


def _root(args, explicit=None):
    root = explicit or args.out or os.environ.get(OUT_ENV)
    if not root:
        raise ConfigError(f"no output root: pass one or set {OUT_ENV}")
    return Path(root)


def _records_under(path):
    path = Path(path)
    return [path] if path.is_file() else find_records(path)


def _images_root(record_path):
    # <root>/final_building_outdir/building_x/final_building_y.json
    return Path(record_path).parents[2]


def cmd_generate(args):
    from .pipeline import run_generate

    overrides = {
        "global_seed": args.seed,
        "exterior_count": args.exteriors,
        "worker_count": args.workers,
        "output_root": args.out,
        "permutation_cap": args.permutation_cap,
        "candidates_per_floor": args.candidates_per_floor,
    }
    cfg = load(args.config, overrides)

    def progress(i, total, r):
        logging.getLogger("synbuild").info("exterior %d/%d: %d buildings", i, total, r.buildings_emitted)

    report = run_generate(cfg, progress)
    summary = report.summary()
    summary["output_root"] = str(cfg.output_root)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if report.exteriors_retained else EXIT_INVALID


def validate_path(path, images=True):
    """(ok, failed check names, error message) for one record file."""
    from .quality import record_report

    try:
        rec = load_record(path)
    except (RecordValidationError, OSError) as e:
        return False, ["Schema"], str(e)
    q = record_report(rec, _images_root(path) if images else None)
    return q.passed, q.failed(), ""


def cmd_validate(args):
    root = _root(args, args.root)
    paths = _records_under(root)
    if not paths:
        print(json.dumps({"root": str(root), "error": "no records found"}))
        return EXIT_INVALID
    bad = 0
    for p in paths:
        ok, failed, err = validate_path(p, not args.no_images)
        bad += not ok
        line = {"path": str(p), "ok": ok}
        if failed:
            line["failed"] = failed
        if err:
            line["error"] = err
        print(json.dumps(line, sort_keys=True))
    print(json.dumps({"records": len(paths), "invalid": bad}, sort_keys=True))
    return EXIT_INVALID if bad else EXIT_OK


def cmd_stats(args):
    from .stats import summarize_paths, to_csv

    root = _root(args, args.root)
    try:
        rows, summary = summarize_paths(_records_under(root), args.workers)
    except RecordValidationError as e:
        print(f"invalid record: {e}", file=sys.stderr)
        return EXIT_INVALID
    text = to_csv(rows) if args.format == "csv" else summary.to_json() + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _streams(spec):
    names = tuple(s.strip() for s in spec.split(",") if s.strip())
    unknown = set(names) - set(STREAM_NAMES)
    if unknown or not names:
        raise ConfigError(f"unknown stream(s): {', '.join(sorted(unknown)) or '(none)'}")
    return names


def _write_obj(path, dest, streams):
    rec = load_record(path)
    target = (Path(dest) if dest else Path(path).parent) / (Path(path).stem + ".obj")
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(export_obj(rec, streams))
    return target


def cmd_export_obj(args):
    streams = _streams(args.streams)
    inputs = args.inputs or [str(_root(args))]
    paths = [p for i in inputs for p in _records_under(i)]
    if not paths:
        print("no records found", file=sys.stderr)
        return EXIT_INVALID
    for p in paths:
        try:
            print(_write_obj(p, args.dest, streams))
        except RecordValidationError as e:
            print(f"{p}: {e}", file=sys.stderr)
            return EXIT_INVALID
    return EXIT_OK


def cmd_sample(args):
    root = _root(args, args.root)
    paths = _records_under(root)
    if args.n < 0:
        raise ConfigError("-n must be >= 0")
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    if args.n == 0:
        return EXIT_OK
    if len(paths) < args.n:
        print(f"warning: only {len(paths)} records available, {args.n} requested", file=sys.stderr)
    if not paths:
        return EXIT_INVALID
    pick = np.random.default_rng(args.seed).choice(len(paths), size=min(args.n, len(paths)), replace=False)
    for k in sorted(int(i) for i in pick):
        p = paths[k]
        folder = dest / exterior_of(p)
        folder.mkdir(parents=True, exist_ok=True)
        shutil.copy2(p, folder / p.name)
        _write_obj(p, folder, STREAM_NAMES)
        img_root = _images_root(p)
        for pid in load_record(p)["floorplan_ID_list"]:
            for sub in (VIS_DIR, MASK_DIR):
                src = img_root / sub / f"{pid}.png"
                if src.exists():
                    (folder / sub).mkdir(exist_ok=True)
                    shutil.copy2(src, folder / sub / src.name)
        print(folder / p.name)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "validate": cmd_validate,
    "stats": cmd_stats,
    "export-obj": cmd_export_obj,
    "sample-for-review": cmd_sample,
}


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.config and args.command != "generate":
            load(args.config, {"output_root": args.out or "unused"})  # surface config errors early
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
