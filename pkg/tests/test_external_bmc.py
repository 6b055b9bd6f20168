import os
import stat
import textwrap

from needlefinder.harness import HarnessConfig, run_external_bmc

CFG = HarnessConfig(call_sequence=("f",), unwind=6, timeout=5.0)

FAILED_TRANSCRIPT = """\
CBMC version fake
Runtime decision procedure: 0.01s

** Results:
[main.assertion.1] assertion s >= 0: FAILURE

Trace for main.assertion.1:
  v1=3 (00000000000000000000000000000011)
  v2=-1 (11111111111111111111111111111111)
  tmp=99 (ignored: not a symbolic input)

Violated property:
  file t.c line 4 function f
  assertion s >= 0

** 1 of 1 failed
VERIFICATION FAILED
"""


def fake_tool(tmp_path, name: str, body: str) -> str:
    p = tmp_path / name
    p.write_text("#!/bin/sh\n" + textwrap.dedent(body))
    p.chmod(p.stat().st_mode | stat.S_IEXEC)
    return str(p)


def test_successful_run_is_verified_to_bound(tmp_path):
    tool = fake_tool(tmp_path, "ok.sh", 'echo "VERIFICATION SUCCESSFUL"\n')
    res = run_external_bmc("h.c", CFG, f"{tool} {{file}} --unwind {{k}}")
    assert res.verdict == "VerifiedToBound"


def test_failed_run_parses_witness_and_property(tmp_path):
    transcript = tmp_path / "out.txt"
    transcript.write_text(FAILED_TRANSCRIPT)
    tool = fake_tool(tmp_path, "fail.sh", f'cat "{transcript}"\nexit 10\n')
    res = run_external_bmc("h.c", CFG, f"{tool} {{file}}")
    assert res.verdict == "Counterexample"
    assert res.witness == {"v1": 3, "v2": -1}
    assert res.violated is not None
    assert "s >= 0" in res.violated.condition


def test_template_receives_file_and_unwind(tmp_path):
    marker = tmp_path / "args.txt"
    tool = fake_tool(
        tmp_path, "spy.sh", f'echo "$@" > "{marker}"\necho "VERIFICATION SUCCESSFUL"\n'
    )
    run_external_bmc("/some/h.c", CFG, f"{tool} {{file}} --unwind {{unwind}}")
    assert marker.read_text().split() == ["/some/h.c", "--unwind", "6"]


def test_missing_binary_is_not_found():
    res = run_external_bmc("h.c", CFG, "/no/such/checker {file}")
    assert res.verdict == "ToolError" and res.detail == "NotFound"


def test_exit_127_is_not_found(tmp_path):
    tool = fake_tool(tmp_path, "x127.sh", "exit 127\n")
    res = run_external_bmc("h.c", CFG, f"{tool} {{file}}")
    assert res.verdict == "ToolError" and res.detail == "NotFound"


def test_unrecognized_output_is_tool_error_with_tail(tmp_path):
    tool = fake_tool(tmp_path, "weird.sh", 'echo "segmentation fault"\nexit 1\n')
    res = run_external_bmc("h.c", CFG, f"{tool} {{file}}")
    assert res.verdict == "ToolError"
    assert "segmentation fault" in res.detail


def test_timeout_is_resource_out(tmp_path):
    tool = fake_tool(tmp_path, "slow.sh", "sleep 30\n")
    cfg = HarnessConfig(call_sequence=("f",), timeout=0.2)
    res = run_external_bmc("h.c", cfg, f"{tool} {{file}}")
    assert res.verdict == "ResourceOut"
    assert "timeout" in res.detail
