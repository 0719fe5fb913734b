import json
import shutil
import subprocess
import sys
from pathlib import Path


from conftest import run_cli
from synbuild.records import find_records


def test_help_and_bad_arguments():
    assert run_cli(["--help"])[0] == 0
    assert run_cli([])[0] == 2
    assert run_cli(["frobnicate"])[0] == 2
    assert run_cli(["generate", "--exteriors", "many"])[0] == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "synbuild", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "sample-for-review" in out.stdout


def test_missing_output_root(monkeypatch):
    monkeypatch.delenv("SYNBUILD_OUT", raising=False)
    assert run_cli(["generate", "--exteriors", 1])[0] == 2
    assert run_cli(["validate"])[0] == 2


def test_invalid_config_values(tmp_path):
    assert run_cli(["generate", "--exteriors", 0, "--out", tmp_path])[0] == 2
    cfg = tmp_path / "c.toml"
    cfg.write_text("exterior_count = 1\n[roof]\ndensity = -3\n")
    assert run_cli(["generate", "--config", cfg, "--out", tmp_path])[0] == 2
    cfg.write_text("bogus_key = 1\n")
    assert run_cli(["validate", "--config", cfg, tmp_path])[0] == 2
    assert run_cli(["generate", "--config", tmp_path / "missing.toml", "--out", tmp_path])[0] == 2


def test_generate_with_env_root(tmp_path, monkeypatch):
    monkeypatch.setenv("SYNBUILD_OUT", str(tmp_path))
    code, out = run_cli(["generate", "--exteriors", 1, "--seed", 3, "--permutation-cap", 1,
                         "--candidates-per-floor", 1])
    report = json.loads(out)
    assert code == 0
    assert report["output_root"] == str(tmp_path)
    assert len(find_records(tmp_path)) == report["buildings_emitted"] >= 1
    # the fallback also serves the read-only commands
    assert run_cli(["validate"])[0] == 0


def test_flag_beats_env(tmp_path, monkeypatch, small_run):
    monkeypatch.setenv("SYNBUILD_OUT", str(tmp_path / "nowhere"))
    assert run_cli(["validate", "--out", small_run])[0] == 0


def test_validate_ok_and_failures(small_run, tmp_path):
    code, out = run_cli(["validate", small_run])
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 0 and lines[-1]["invalid"] == 0 and lines[-1]["records"] == len(lines) - 1
    assert run_cli(["validate", tmp_path])[0] == 1  # nothing there

    bad_root = tmp_path / "copy"
    shutil.copytree(small_run, bad_root)
    victim = find_records(bad_root)[0]
    body = json.loads(victim.read_bytes())
    del body["final_roof_adj"]
    victim.write_text(json.dumps(body))
    code, out = run_cli(["validate", bad_root])
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 1 and lines[-1]["invalid"] == 1
    broken = [x for x in lines if x.get("ok") is False][0]
    assert broken["failed"] == ["Schema"] and "final_roof_adj" in broken["error"]


def test_validate_needs_masks_unless_told(small_run, tmp_path):
    root = tmp_path / "nomasks"
    shutil.copytree(small_run / "final_building_outdir", root / "final_building_outdir")
    assert run_cli(["validate", root])[0] == 1
    assert run_cli(["validate", "--no-images", root])[0] == 0


def test_stats_json_and_csv(small_run, tmp_path):
    code, out = run_cli(["stats", small_run])
    s = json.loads(out)
    n = len(find_records(small_run))
    assert code == 0 and s["buildings"] == n
    assert sum(b["buildings"] for b in s["buildings_per_exterior"]) == n
    dest = tmp_path / "s.csv"
    assert run_cli(["stats", small_run, "--format", "csv", "-o", dest])[0] == 0
    rows = dest.read_text().splitlines()
    assert rows[0].startswith("path,exterior,nodes") and len(rows) == n + 1


def test_export_obj(small_run, tmp_path):
    code, out = run_cli(["export-obj", small_run, "--dest", tmp_path, "--streams", "building,roof"])
    files = out.split()
    assert code == 0 and len(files) == len(find_records(small_run))
    text = open(files[0]).read()
    assert "g building" in text and "g roof" in text and "g door" not in text
    assert run_cli(["export-obj", small_run, "--streams", "chimney"])[0] == 2


def test_sample_for_review(small_run, tmp_path):
    dest = tmp_path / "review"
    code, out = run_cli(["sample-for-review", small_run, "-n", 2, "--seed", 1, "--dest", dest])
    picked = out.split()
    assert code == 0 and len(picked) == 2
    for p in picked:
        folder = Path(p).parent
        assert list(folder.glob("*.obj"))
        assert list((folder / "final_segmentation_outdir").glob("*.png"))
    again = run_cli(["sample-for-review", small_run, "-n", 2, "--seed", 1, "--dest", tmp_path / "r2"])[1]
    assert [p.split("/")[-1] for p in again.split()] == [p.split("/")[-1] for p in picked]
    empty = tmp_path / "empty"
    assert run_cli(["sample-for-review", small_run, "-n", 0, "--dest", empty]) == (0, "")
    assert empty.is_dir() and not any(empty.iterdir())
    assert run_cli(["sample-for-review", small_run, "-n", -1, "--dest", dest])[0] == 2


def test_sample_warns_when_short(small_run, tmp_path, capsys):
    n = len(find_records(small_run))
    code, out = run_cli(["sample-for-review", small_run, "-n", n + 5, "--dest", tmp_path])
    assert code == 0 and len(out.split()) == n
    assert "only" in capsys.readouterr().err
