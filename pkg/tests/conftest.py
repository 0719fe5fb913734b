import contextlib
import hashlib
import io
import json
import time
from pathlib import Path

import numpy as np
import pytest

from synbuild import cli

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


def tree_digest(root):
    """relative path -> sha256 of every file below ``root``."""
    root = Path(root)
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def run_cli(argv):
    """(exit code, stdout) of an in-process CLI call."""
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main([str(a) for a in argv])
    return code, buf.getvalue()


class DeskRun:
    def __init__(self, root, code, report, elapsed):
        self.root = Path(root)
        self.code = code
        self.report = report
        self.elapsed = elapsed


@pytest.fixture(scope="session")
def desk_run(tmp_path_factory):
    """The 25-exterior, 4-worker run shared by the end-to-end tests."""
    root = tmp_path_factory.mktemp("desk")
    t0 = time.perf_counter()
    code, out = run_cli(["generate", "--exteriors", 25, "--workers", 4, "--seed", 0, "--out", root])
    elapsed = time.perf_counter() - t0
    return DeskRun(root, code, json.loads(out.strip().splitlines()[-1]), elapsed)


@pytest.fixture(scope="session")
def small_run(tmp_path_factory):
    """Two exteriors, two orders each: quick material for CLI and record tests."""
    root = tmp_path_factory.mktemp("small")
    code, out = run_cli(["generate", "--exteriors", 2, "--permutation-cap", 2, "--candidates-per-floor", 2,
                         "--out", root])
    assert code == 0, out
    return root


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
