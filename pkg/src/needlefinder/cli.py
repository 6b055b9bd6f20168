"""Command-line entry points for the mining/checking pipeline."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .drivers import DRIVERS
from .engine import Program
from .harness import derive_properties, exhaustive_check, generate_harness, run_external_bmc
from .instrument import instrument_source
from .invariants import InferenceConfig, Invariant, infer as infer_invariants
from .pipeline import (
    PipelineConfig,
    _harness_config,
    load_manifest,
    render_markdown,
    run_pipeline,
    select_invariants,
)
from .source_model import extract_facts, parse_unit
from .traces import ingest
from .triage import triage_corpus


def _fail(msg: str) -> None:
    click.echo(f"error: {msg}", err=True)
    sys.exit(2)


def _fixture(manifest_path: str, name: str) -> tuple[dict, dict, Path]:
    manifest = load_manifest(manifest_path)
    for fx in manifest["fixtures"]:
        if fx["name"] == name:
            return manifest, fx, Path(manifest_path).parent
    _fail(f"no fixture named {name!r} in {manifest_path}")


def _instrumented_program(fx: dict, root: Path) -> tuple[Program, object]:
    src = (root / fx["file"]).read_text(encoding="utf-8")
    inst = instrument_source(src, fx["file"], functions=fx.get("instrument"))
    unit = inst.parse()
    return Program(unit), unit


@click.group()
@click.version_option(__version__, prog_name="needlefinder")
def main() -> None:
    """Mine C sources for checkable functions and decide them exhaustively."""


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--json", "json_out", type=click.Path(), help="also write verdicts as JSON")
def triage(files, json_out):
    """Rank functions by push-button checkability."""
    units = []
    for f in files:
        units.append(parse_unit(Path(f).read_text(encoding="utf-8"), f))
    verdicts = triage_corpus(units)
    for v in verdicts:
        extra = ",".join(v.reasons) or ",".join(v.notes)
        click.echo(f"{v.decision:7s} {v.score:5.3f} {v.function:20s} {extra}")
    if json_out:
        Path(json_out).write_text(
            json.dumps([v.to_dict() for v in verdicts], indent=2, sort_keys=True) + "\n"
        )


@main.command()
@click.argument("file", type=click.Path(exists=True))
@click.option("--functions", help="comma-separated list; default: all")
@click.option("--out", type=click.Path(), help="write instrumented source here")
def instrument(file, functions, out):
    """Inject branch counters and entry/exit trace probes."""
    fns = functions.split(",") if functions else None
    inst = instrument_source(Path(file).read_text(encoding="utf-8"), file, functions=fns)
    if out:
        Path(out).write_text(inst.text, encoding="utf-8")
        click.echo(f"wrote {out} ({len(inst.counter_decls)} counters)")
    else:
        click.echo(inst.text, nl=False)


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--name", required=True, help="fixture name from the manifest")
@click.option("--out", type=click.Path(), help="trace file (default: $NF_TRACE_FILE or nf.trace)")
def trace(manifest, name, out):
    """Run a fixture's built-in random driver and write its trace."""
    _, fx, root = _fixture(manifest, name)
    drv = fx.get("driver")
    if not drv:
        _fail(f"fixture {name!r} has no driver")
    fn = DRIVERS.get(drv["name"])
    if fn is None:
        _fail(f"unknown driver {drv['name']!r}")
    prog, _ = _instrumented_program(fx, root)
    outcome = fn(prog, **{k: v for k, v in drv.items() if k != "name"})
    path = out or os.environ.get("NF_TRACE_FILE", "nf.trace")
    Path(path).write_text("".join(r.to_line() + "\n" for r in outcome.records), encoding="utf-8")
    click.echo(f"{len(outcome.records)} records -> {path}; tester findings: {len(outcome.failures)}")


@main.command()
@click.argument("trace_file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default="invariants.json", show_default=True)
@click.option("--min-support", default=5, show_default=True)
@click.option("--one-of-cap", default=3, show_default=True)
def infer(trace_file, out, min_support, one_of_cap):
    """Infer likely invariants from a trace file."""
    store = ingest(trace_file)
    invs = infer_invariants(store, InferenceConfig(min_support=min_support, one_of_cap=one_of_cap))
    Path(out).write_text(json.dumps([i.to_dict() for i in invs], indent=2, sort_keys=True) + "\n")
    click.echo(f"{len(invs)} invariants over {len(store.points())} points -> {out}")


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--name", required=True)
@click.option("--invariants", "inv_file", type=click.Path(exists=True))
@click.option("--dialect", type=click.Choice(["cbmc", "svcomp"]), default="cbmc", show_default=True)
@click.option("--out", type=click.Path(), help="write the harness .c here (default: stdout)")
def harness(manifest, name, inv_file, dialect, out):
    """Generate a checker harness for a fixture target."""
    _, fx, root = _fixture(manifest, name)
    if not fx.get("harness"):
        _fail(f"fixture {name!r} has no harness entry")
    _, unit = _instrumented_program(fx, root)
    facts = {f.name: f for f in extract_facts(unit)}
    hcfg = _harness_config({**fx["harness"], "dialect": dialect})
    invs = []
    if inv_file:
        invs = select_invariants(
            [Invariant.from_dict(d) for d in json.loads(Path(inv_file).read_text())],
            fx["harness"].get("invariants"),
        )
    target = hcfg.call_sequence[-1]
    props = derive_properties(facts[target], include_overflow=hcfg.include_overflow)
    h = generate_harness(facts, invs, props, hcfg, globals_in_scope=frozenset(unit.global_names()))
    if out:
        Path(out).write_text(h.text, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(h.text, nl=False)


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--name", required=True)
@click.option("--invariants", "inv_file", type=click.Path(exists=True))
@click.option("--backend", type=click.Choice(["internal", "external"]), default="internal", show_default=True)
@click.option("--unwind", type=int, help="override the loop bound")
@click.option("--bmc-cmd", help='external tool template, e.g. "cbmc {file} --unwind {k}"')
@click.option("--harness-file", type=click.Path(), help="harness path for the external backend")
def check(manifest, name, inv_file, backend, unwind, bmc_cmd, harness_file):
    """Decide a fixture harness. Exit: 0 clean, 1 counterexample, 2 error."""
    from dataclasses import replace

    _, fx, root = _fixture(manifest, name)
    if not fx.get("harness"):
        _fail(f"fixture {name!r} has no harness entry")
    prog, unit = _instrumented_program(fx, root)
    facts = {f.name: f for f in extract_facts(unit)}
    hcfg = _harness_config(fx["harness"])
    if unwind:
        hcfg = replace(hcfg, unwind=unwind)
    invs = []
    if inv_file:
        invs = select_invariants(
            [Invariant.from_dict(d) for d in json.loads(Path(inv_file).read_text())],
            fx["harness"].get("invariants"),
        )
    target = hcfg.call_sequence[-1]
    props = derive_properties(facts[target], include_overflow=hcfg.include_overflow)
    h = generate_harness(facts, invs, props, hcfg, globals_in_scope=frozenset(unit.global_names()))
    if backend == "external":
        if not bmc_cmd:
            _fail("--bmc-cmd is required with --backend external")
        path = harness_file or f"{name}.harness.c"
        Path(path).write_text(h.text, encoding="utf-8")
        result = run_external_bmc(path, hcfg, bmc_cmd)
    else:
        result = exhaustive_check(prog, h)
    click.echo(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    if result.verdict == "Counterexample":
        sys.exit(1)
    if result.verdict in ("ToolError", "ResourceOut"):
        sys.exit(2)


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--force", is_flag=True, help="rebuild artifacts even when present")
def run(manifest, out_dir, force):
    """Full pipeline. Exit: 0 clean, 1 likely bugs found, 2 error."""
    report = run_pipeline(PipelineConfig(manifest=manifest, out_dir=out_dir, force=force))
    s = report["summary"]
    click.echo(
        f"{s['functions']} functions, {s['accepted']} accepted, "
        f"{s['likely_bugs']} likely bugs -> {Path(out_dir) / 'report.json'}"
    )
    if report["incomplete"]:
        sys.exit(2)
    if s["likely_bugs"]:
        sys.exit(1)


@main.command()
@click.option("--out-dir", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["json", "markdown"]), default="markdown", show_default=True)
@click.option("--out", type=click.Path(), help="write here instead of stdout")
def report(out_dir, fmt, out):
    """Render the report from a completed pipeline run."""
    data = json.loads((Path(out_dir) / "report.json").read_text(encoding="utf-8"))
    text = json.dumps(data, indent=2, sort_keys=True) + "\n" if fmt == "json" else render_markdown(data)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
