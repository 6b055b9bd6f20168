"""End-to-end orchestration: triage, instrument, trace, infer, harness, check.

Every stage persists its artifact under the output directory and is skipped
when the artifact already exists, so a run can resume after deleting any
single stage's outputs. All persisted JSON is stable-ordered and carries no
timestamps: identical inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .drivers import DRIVERS
from .engine import Program
from .errors import StageFailure
from .harness import (
    CheckResult,
    HarnessConfig,
    HarnessSource,
    Property,
    derive_properties,
    exhaustive_check,
    generate_harness,
    suggest_unwind,
)
from .instrument import instrument_source
from .invariants import InferenceConfig, Invariant, infer
from .source_model import extract_facts, parse_unit
from .traces import SampleStore, ingest
from .triage import TriageConfig, TriageVerdict, triage_corpus

REPORT_SCHEMA = 1
STAGES = ("triage", "instrument", "trace", "infer", "harness", "check")


@dataclass
class PipelineConfig:
    manifest: str  # corpus.json path
    out_dir: str
    triage: TriageConfig = field(default_factory=TriageConfig)
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    max_accepted: int = 64  # functions checked per run; the rest is reported as truncated
    force: bool = False  # rebuild artifacts even when present

    @property
    def root(self) -> Path:
        return Path(self.manifest).parent


def load_manifest(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _harness_config(h: dict) -> HarnessConfig:
    return HarnessConfig(
        dialect=h.get("dialect", "cbmc"),
        call_sequence=tuple(h["call_sequence"]),
        domain_bounds={k: tuple(v) for k, v in h.get("domain_bounds", {}).items()},
        array_size_bounds=dict(h.get("array_size_bounds", {})),
        length_params=dict(h.get("length_params", {})),
        unwind=h.get("unwind", 4),
        prefer_ranges=h.get("prefer_ranges", True),
        include_overflow=h.get("include_overflow", False),
        state_check=h.get("state_check"),
        budget=h.get("budget", 10**7),
    )


def select_invariants(invs: list[Invariant], sel: dict | None) -> list[Invariant]:
    """Manifest-driven pick: a program point plus a var list and/or prefix."""
    if not sel:
        return []
    out = []
    for inv in invs:
        if inv.pp != sel.get("point"):
            continue
        names = sel.get("vars")
        prefix = sel.get("var_prefix")
        keep = True
        for v in inv.variables:
            if names is not None and v not in names:
                keep = False
            if prefix is not None and not v.startswith(prefix):
                keep = False
        if keep:
            out.append(inv)
    return out


class Pipeline:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.manifest = load_manifest(cfg.manifest)
        self.out = Path(cfg.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.failures: list[dict] = []
        self.malformed = 0
        self._units: dict[str, object] = {}
        self._programs: dict[str, Program] = {}

    # -- helpers ---------------------------------------------------------------

    def fixtures(self) -> list[dict]:
        return self.manifest["fixtures"]

    def _src_path(self, fx: dict) -> Path:
        return self.cfg.root / fx["file"]

    def _art(self, name: str) -> Path:
        return self.out / name

    def _fresh(self, *paths: Path) -> bool:
        return not self.cfg.force and all(p.exists() for p in paths)

    def _instr_unit(self, fx: dict):
        name = fx["name"]
        if name not in self._units:
            path = self._art(f"{name}.instr.c")
            src = path.read_text(encoding="utf-8") if path.exists() else None
            if src is None:
                raise StageFailure("instrument", f"missing artifact {path}")
            self._units[name] = parse_unit(src, str(path))
        return self._units[name]

    def _program(self, fx: dict) -> Program:
        name = fx["name"]
        if name not in self._programs:
            self._programs[name] = Program(self._instr_unit(fx))
        return self._programs[name]

    # -- stages ----------------------------------------------------------------

    def stage_triage(self) -> list[TriageVerdict]:
        art = self._art("triage.json")
        units = []
        for fx in self.fixtures():
            try:
                units.append(parse_unit(self._src_path(fx).read_text(encoding="utf-8"), fx["file"]))
            except Exception as e:  # per-file failures tolerated and reported
                self.failures.append({"stage": "triage", "file": fx["file"], "error": str(e)})
        verdicts = triage_corpus(units, self.cfg.triage)
        if self._fresh(art):
            return [TriageVerdict.from_dict(d) for d in json.loads(art.read_text())]
        _dump_json(art, [v.to_dict() for v in verdicts])
        return verdicts

    def stage_instrument(self) -> None:
        for fx in self.fixtures():
            fns = fx.get("instrument")
            if not fns:
                continue
            art = self._art(f"{fx['name']}.instr.c")
            pts = self._art(f"{fx['name']}.points.json")
            if self._fresh(art, pts):
                continue
            try:
                inst = instrument_source(
                    self._src_path(fx).read_text(encoding="utf-8"), fx["file"], functions=fns
                )
            except Exception as e:
                raise StageFailure("instrument", f"{fx['name']}: {e}")
            art.write_text(inst.text, encoding="utf-8")
            _dump_json(
                pts,
                {
                    "points": {k: list(v) for k, v in sorted(inst.point_map.items())},
                    "counters": [
                        {"name": c.name, "function": c.function, "ordinal": c.ordinal, "pp": c.pp_id}
                        for c in inst.counter_decls
                    ],
                },
            )

    def stage_trace(self) -> None:
        for fx in self.fixtures():
            drv = fx.get("driver")
            if not drv:
                continue
            art = self._art(f"{fx['name']}.trace")
            if self._fresh(art):
                continue
            fn = DRIVERS.get(drv["name"])
            if fn is None:
                raise StageFailure("trace", f"unknown driver {drv['name']!r}")
            try:
                prog = self._program(fx)
                kwargs = {k: v for k, v in drv.items() if k not in ("name",)}
                outcome = fn(prog, **kwargs)
            except StageFailure:
                raise
            except Exception as e:
                raise StageFailure("trace", f"{fx['name']}: {e}")
            art.write_text(
                "".join(r.to_line() + "\n" for r in outcome.records), encoding="utf-8"
            )
            if outcome.failures:
                _dump_json(self._art(f"{fx['name']}.tester_findings.json"), outcome.failures)

    def stage_infer(self) -> dict[str, list[Invariant]]:
        out: dict[str, list[Invariant]] = {}
        for fx in self.fixtures():
            if not fx.get("driver"):
                continue
            trace = self._art(f"{fx['name']}.trace")
            art = self._art(f"{fx['name']}.invariants.json")
            if self._fresh(art):
                out[fx["name"]] = [Invariant.from_dict(d) for d in json.loads(art.read_text())]
                continue
            try:
                store = ingest(trace)
            except Exception as e:
                raise StageFailure("infer", f"{fx['name']}: {e}")
            self.malformed += store.skipped
            invs = infer(store, self.cfg.inference)
            _dump_json(art, [i.to_dict() for i in invs])
            out[fx["name"]] = invs
        return out

    def _build_harness(self, fx: dict, invs: list[Invariant]) -> HarnessSource:
        unit = self._instr_unit(fx)
        facts = {f.name: f for f in extract_facts(unit)}
        hcfg = _harness_config(fx["harness"])
        target = hcfg.call_sequence[-1]
        selected = select_invariants(invs, fx["harness"].get("invariants"))
        props = derive_properties(facts[target], include_overflow=hcfg.include_overflow)
        uf = fx["harness"].get("unwind_from")
        if uf:
            schedule = suggest_unwind(facts[target], select_invariants(invs, uf))
            hcfg = replace(hcfg, unwind=schedule[0])
        return generate_harness(
            facts, selected, props, hcfg, globals_in_scope=frozenset(unit.global_names())
        )

    def stage_harness(self, inferred: dict[str, list[Invariant]]) -> dict[str, HarnessSource]:
        out: dict[str, HarnessSource] = {}
        for fx in self.fixtures():
            if not fx.get("harness"):
                continue
            try:
                h = self._build_harness(fx, inferred.get(fx["name"], []))
            except Exception as e:
                raise StageFailure("harness", f"{fx['name']}: {e}")
            out[fx["name"]] = h
            art = self._art(f"{fx['name']}.harness.c")
            if not self._fresh(art):
                art.write_text(h.text, encoding="utf-8")
        return out

    def stage_check(
        self, harnesses: dict[str, HarnessSource], verdicts: list[TriageVerdict]
    ) -> dict[str, CheckResult]:
        art = self._art("checks.json")
        accepted = {v.function for v in verdicts if v.accepted}
        results: dict[str, CheckResult] = {}
        if self._fresh(art):
            raw = json.loads(art.read_text())
            for name, d in raw.items():
                v = d.get("violated")
                prop = (
                    Property(v["kind"], v["function"], tuple(v["loc"]), v["condition"], v["detail"])
                    if v
                    else None
                )
                results[name] = CheckResult(
                    d["verdict"], d["witness"], prop, d["explored"], d["excluded"], d["caps_hit"], 0.0, d["detail"]
                )
            return results
        checked = 0
        for fx in self.fixtures():
            h = harnesses.get(fx["name"])
            if h is None:
                continue
            if h.target not in accepted:
                results[fx["name"]] = CheckResult("ToolError", detail=f"target {h.target} not accepted by triage")
                continue
            if checked >= self.cfg.max_accepted:
                results[fx["name"]] = CheckResult("ToolError", detail="truncated: per-run accepted-function limit")
                continue
            checked += 1
            try:
                results[fx["name"]] = exhaustive_check(self._program(fx), h)
            except Exception as e:
                raise StageFailure("check", f"{fx['name']}: {e}")
        _dump_json(art, {k: v.to_dict() for k, v in results.items()})
        return results


def classify(result: CheckResult | None, accepted: bool, reason: str = "") -> str:
    if not accepted:
        return f"skipped({reason or 'rejected'})"
    if result is None:
        return "skipped(not-checked)"
    if result.verdict == "Counterexample":
        return "likely-bug"
    if result.verdict in ("ExhaustedClean", "VerifiedToBound"):
        return "clean-to-bound"
    return f"skipped({result.verdict})"


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Execute all stages; a StageFailure still yields a partial report."""
    p = Pipeline(cfg)
    report: dict = {
        "schema": REPORT_SCHEMA,
        "incomplete": False,
        "tools": {"needlefinder": __version__, "backend": "internal"},
        "stage_failures": p.failures,
        "triage": [],
        "findings": [],
        "summary": {},
    }
    verdicts: list[TriageVerdict] = []
    results: dict[str, CheckResult] = {}
    harnesses: dict[str, HarnessSource] = {}
    inferred: dict[str, list[Invariant]] = {}
    try:
        verdicts = p.stage_triage()
        p.stage_instrument()
        p.stage_trace()
        inferred = p.stage_infer()
        harnesses = p.stage_harness(inferred)
        results = p.stage_check(harnesses, verdicts)
    except StageFailure as e:
        report["incomplete"] = True
        p.failures.append({"stage": e.stage, "error": str(e.cause)})

    by_fn = {v.function: v for v in verdicts}
    report["triage"] = [v.to_dict() for v in verdicts]
    likely = 0
    for fx in p.fixtures():
        if not fx.get("harness"):
            continue
        target = fx["harness"]["call_sequence"][-1]
        v = by_fn.get(target)
        res = results.get(fx["name"])
        cls = classify(res, v.accepted if v else False, ",".join(v.reasons) if v else "unknown")
        if cls == "likely-bug":
            likely += 1
        report["findings"].append(
            {
                "fixture": fx["name"],
                "function": target,
                "classification": cls,
                "score": v.score if v else 0.0,
                "invariants": [
                    i.to_dict()
                    for i in select_invariants(
                        inferred.get(fx["name"], []), fx["harness"].get("invariants")
                    )
                ],
                "result": res.to_dict() if res else None,
            }
        )
    report["summary"] = {
        "functions": len(verdicts),
        "accepted": sum(1 for v in verdicts if v.accepted),
        "rejected": sum(1 for v in verdicts if not v.accepted),
        "checked": sum(1 for r in results.values() if r.verdict != "ToolError"),
        "likely_bugs": likely,
        "malformed_trace_lines": p.malformed,
    }
    _dump_json(p._art("report.json"), report)
    return report


def render_markdown(report: dict) -> str:
    lines = ["# needlefinder report", ""]
    s = report["summary"]
    lines.append(
        f"{s.get('functions', 0)} functions, {s.get('accepted', 0)} accepted, "
        f"{s.get('likely_bugs', 0)} likely bugs."
    )
    if report.get("incomplete"):
        lines.append("")
        lines.append("**Incomplete run** - one or more stages failed.")
    lines += ["", "| function | score | classification | verdict | property | witness |", "|---|---|---|---|---|---|"]
    rows = sorted(report["findings"], key=lambda f: (-f["score"], f["function"]))
    for f in rows:
        res = f.get("result") or {}
        viol = (res.get("violated") or {}).get("kind", "")
        wit = res.get("witness")
        wit_s = "" if not wit else " ".join(f"{k}={v}" for k, v in sorted(wit.items()))
        lines.append(
            f"| {f['function']} | {f['score']:.3f} | {f['classification']} | "
            f"{res.get('verdict', '')} | {viol} | {wit_s} |"
        )
    lines.append("")
    return "\n".join(lines)
