"""Build-and-run checks for the C fixture corpus and its trace shim."""

import shutil
import subprocess

import pytest

from conftest import CORPUS

pytestmark = pytest.mark.skipif(shutil.which("cc") is None, reason="no C compiler on PATH")

BUILD = CORPUS / "build"


def make(*targets) -> subprocess.CompletedProcess:
    return subprocess.run(
        ["make", "-C", str(CORPUS), *targets], capture_output=True, text=True
    )


@pytest.fixture(scope="module", autouse=True)
def built():
    r = make("corpus")
    assert r.returncode == 0, r.stdout + r.stderr


def test_traces_reproduce_checked_in_artifacts():
    r = make("test")
    assert r.returncode == 0, r.stdout + r.stderr
    assert "all trace comparisons passed" in r.stdout


def test_random_tester_reports_no_findings_on_shipped_seed():
    # exit status counts repOK failures; the shipped seed must stay quiet
    for exe in ("bintree_driver", "bintree_buggy_driver"):
        r = subprocess.run(
            [str(BUILD / exe), "17", "5000", "4"],
            env={"NF_TRACE_FILE": "/dev/null", "PATH": "/usr/bin:/bin"},
            capture_output=True,
        )
        assert r.returncode == 0, exe


def test_long_sequences_do_reach_the_seeded_bug(tmp_path):
    # the defect is dynamically reachable: deeper random walks trip repOK
    r = subprocess.run(
        [str(BUILD / "bintree_buggy_driver"), "1", "2000", "50"],
        env={"NF_TRACE_FILE": str(tmp_path / "deep.trace"), "PATH": "/usr/bin:/bin"},
        capture_output=True,
    )
    assert r.returncode != 0
    ok = subprocess.run(
        [str(BUILD / "bintree_driver"), "1", "2000", "50"],
        env={"NF_TRACE_FILE": str(tmp_path / "deep_ok.trace"), "PATH": "/usr/bin:/bin"},
        capture_output=True,
    )
    assert ok.returncode == 0


def test_unwritable_trace_path_sets_error_flag(tmp_path):
    r = subprocess.run(
        [str(BUILD / "shim_smoke"), "10"],
        env={"NF_TRACE_FILE": str(tmp_path / "no_dir" / "x.trace"), "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
    )
    assert r.returncode == 1
    assert "dropped" in r.stderr


def test_zero_variable_record_shape(tmp_path):
    src = tmp_path / "zero.c"
    src.write_text(
        '#include "nf_trace.h"\n'
        "int main(void) { nf_trace(\"f:entry:0\", 0, 0, 0); return nf_trace_error(); }\n"
    )
    exe = tmp_path / "zero"
    shim = CORPUS / "shim"
    r = subprocess.run(
        ["cc", "-I", str(shim), "-o", str(exe), str(src), str(shim / "nf_trace.c")],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0, r.stderr
    out = tmp_path / "zero.trace"
    run = subprocess.run(
        [str(exe)], env={"NF_TRACE_FILE": str(out), "PATH": "/usr/bin:/bin"}, capture_output=True
    )
    assert run.returncode == 0
    assert out.read_text() == '{"pp":"f:entry:0","vars":{}}\n'
