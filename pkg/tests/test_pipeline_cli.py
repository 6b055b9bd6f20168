import json

import pytest
from click.testing import CliRunner

from conftest import CORPUS, SRC
from needlefinder.cli import main
from needlefinder.pipeline import PipelineConfig, render_markdown, run_pipeline

MANIFEST = str(CORPUS / "corpus.json")


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipeline")
    report = run_pipeline(PipelineConfig(manifest=MANIFEST, out_dir=str(out)))
    return out, report


def test_report_classifications(run_dir):
    _, report = run_dir
    cls = {f["fixture"]: f["classification"] for f in report["findings"]}
    assert cls == {
        "bintree": "clean-to-bound",
        "bintree_buggy": "likely-bug",
        "minutes": "likely-bug",
        "bmh": "clean-to-bound",
        "bmh_buggy": "likely-bug",
    }
    assert report["summary"]["likely_bugs"] == 3
    assert report["summary"]["accepted"] + report["summary"]["rejected"] == report["summary"]["functions"]
    assert not report["incomplete"]


def test_report_witnesses_match_certified_bugs(run_dir):
    _, report = run_dir
    manifest = json.loads((CORPUS / "corpus.json").read_text())
    certified = {
        fx["name"]: fx["bug"]["certified_witness"] for fx in manifest["fixtures"] if "bug" in fx
    }
    for f in report["findings"]:
        if f["fixture"] in certified and f["classification"] == "likely-bug":
            assert f["result"]["witness"] == certified[f["fixture"]]


def test_stage_artifacts_written(run_dir):
    out, _ = run_dir
    for name in ("triage.json", "bintree.instr.c", "bintree.trace", "bintree.invariants.json",
                 "bintree.harness.c", "checks.json", "report.json"):
        assert (out / name).exists(), name


def test_rerun_is_byte_identical(run_dir):
    out, _ = run_dir
    before = (out / "report.json").read_bytes()
    run_pipeline(PipelineConfig(manifest=MANIFEST, out_dir=str(out)))
    assert (out / "report.json").read_bytes() == before


def test_resume_after_deleting_one_stage(run_dir):
    out, _ = run_dir
    before = (out / "report.json").read_bytes()
    (out / "checks.json").unlink()
    (out / "minutes.invariants.json").unlink()
    run_pipeline(PipelineConfig(manifest=MANIFEST, out_dir=str(out)))
    assert (out / "report.json").read_bytes() == before


def test_bad_driver_yields_partial_report(tmp_path):
    manifest = {
        "schema": 1,
        "fixtures": [
            {
                "name": "minutes",
                "file": str(SRC / "minutes.c"),
                "instrument": ["to_millis"],
                "driver": {"name": "no_such_driver", "seed": 1},
            }
        ],
    }
    mpath = tmp_path / "m.json"
    mpath.write_text(json.dumps(manifest))
    report = run_pipeline(PipelineConfig(manifest=str(mpath), out_dir=str(tmp_path / "out")))
    assert report["incomplete"]
    assert any(f["stage"] == "trace" for f in report["stage_failures"])


def test_markdown_table_ranked_by_score(run_dir):
    _, report = run_dir
    md = render_markdown(report)
    assert "| function |" in md
    rows = [l for l in md.splitlines() if l.startswith("| ") and "---" not in l and "function" not in l]
    scores = [float(r.split("|")[2]) for r in rows]
    assert scores == sorted(scores, reverse=True)
    assert any("likely-bug" in r for r in rows)


def test_cli_run_and_report(run_dir):
    out, _ = run_dir
    runner = CliRunner()
    r = runner.invoke(main, ["run", "--manifest", MANIFEST, "--out-dir", str(out)])
    assert r.exit_code == 1  # likely bugs present
    assert "3 likely bugs" in r.output

    r2 = runner.invoke(main, ["report", "--out-dir", str(out), "--format", "json"])
    assert r2.exit_code == 0
    assert json.loads(r2.output)["summary"]["likely_bugs"] == 3


def test_cli_triage_lists_rejections():
    runner = CliRunner()
    r = runner.invoke(main, ["triage", str(SRC / "triage_corpus.c")])
    assert r.exit_code == 0
    assert "RECURSIVE" in r.output and "reject" in r.output


def test_cli_check_counterexample_exit_code(tmp_path):
    runner = CliRunner()
    r = runner.invoke(
        main, ["check", "--manifest", MANIFEST, "--name", "minutes", "--unwind", "4"]
    )
    assert r.exit_code == 1
    assert '"verdict": "Counterexample"' in r.output


def test_cli_unknown_fixture_is_an_error():
    runner = CliRunner()
    r = runner.invoke(main, ["trace", "--manifest", MANIFEST, "--name", "nope"])
    assert r.exit_code == 2
