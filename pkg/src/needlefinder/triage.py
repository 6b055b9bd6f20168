"""Verification task triage: score functions for push-button model checkability.

Hard gates (missing spec, non-simple types, recursion, opaque body, excessive
loop nesting) reject; everything else only discounts the rank score, since a
call to a "bad" function can often be summarized away later.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .source_model import CallGraph, FunctionFacts, build_call_graph, extract_facts
from .source_model.cast import SourceUnit
from .source_model.facts import DEFAULT_ASSERT_MACROS

DEFAULT_BAD_CALLEES = frozenset(
    {"malloc", "calloc", "realloc", "free", "memcpy", "memmove", "memset", "strcpy", "system", "exit", "abort"}
)


@dataclass(frozen=True)
class TriageConfig:
    allowed_ground_kinds: frozenset[str] = frozenset({"int", "short", "long", "char", "void"})
    allow_pointers_to_allowed: bool = True
    max_loop_nesting: int = 3
    forbid_recursion: bool = True
    forbid_unresolved_callees: bool = False
    assert_macro_names: frozenset[str] = DEFAULT_ASSERT_MACROS
    bad_callee_names: frozenset[str] = DEFAULT_BAD_CALLEES
    # each triggered penalty multiplies the score by the matching weight
    loop_nesting_weight: float = 0.8
    callee_weight: float = 0.8
    bad_callee_weight: float = 0.8
    unresolved_call_weight: float = 0.8

    def __post_init__(self):
        if not self.allowed_ground_kinds:
            raise ValueError("allowed_ground_kinds must be nonempty")


@dataclass
class TriageVerdict:
    function: str
    decision: str  # 'accept' | 'reject'
    reasons: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    score: float = 0.0
    assert_sites: int = 0

    @property
    def accepted(self) -> bool:
        return self.decision == "accept"

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "decision": self.decision,
            "reasons": list(self.reasons),
            "notes": list(self.notes),
            "score": self.score,
        }

    @staticmethod
    def from_dict(d: dict) -> "TriageVerdict":
        return TriageVerdict(
            d["function"], d["decision"], list(d["reasons"]), list(d["notes"]), d["score"]
        )


def has_spec(facts: FunctionFacts, cfg: TriageConfig) -> bool:
    """A function has an implicit spec if it asserts or dereferences memory."""
    return facts.assert_count > 0 or facts.deref_count > 0


def _type_ok(t, cfg: TriageConfig) -> bool:
    if t.kind in ("pointer", "array"):
        return cfg.allow_pointers_to_allowed and _type_ok(t.elem, cfg)
    return t.kind in cfg.allowed_ground_kinds


def type_gate(facts: FunctionFacts, cfg: TriageConfig) -> list[str]:
    """Reasons for every param/local/read-global that is not a simple C type."""
    out = []
    for group, pairs in (("param", facts.params), ("local", facts.locals), ("global", facts.reads_globals)):
        for name, t in pairs:
            if not _type_ok(t, cfg):
                out.append(f"BAD_TYPE({group} {name}: {t.render()})")
    return out


def triage_function(facts: FunctionFacts, graph: CallGraph, cfg: TriageConfig) -> TriageVerdict:
    v = TriageVerdict(facts.name, "accept", assert_sites=facts.assert_count)
    if facts.opaque:
        v.reasons.append("OPAQUE")
    if not has_spec(facts, cfg):
        v.reasons.append("NO_SPEC")
    v.reasons.extend(type_gate(facts, cfg))
    recursive = graph.is_recursive(facts.name) if facts.name in graph.nodes else facts.is_recursive
    if cfg.forbid_recursion and recursive:
        v.reasons.append("RECURSIVE")
    if facts.max_loop_nesting > cfg.max_loop_nesting:
        v.reasons.append(f"LOOP_NESTING({facts.max_loop_nesting}>{cfg.max_loop_nesting})")
    unresolved = [t for c, t in graph.unresolved_calls if c == facts.name]
    if cfg.forbid_unresolved_callees and unresolved:
        v.reasons.append(f"UNRESOLVED_CALLEE({','.join(unresolved)})")

    if v.reasons:
        v.decision = "reject"
        v.score = 0.0
        return v

    score = 1.0
    for _ in range(facts.max_loop_nesting):
        score *= cfg.loop_nesting_weight
    for c in facts.callees:
        score *= cfg.callee_weight
        if c in cfg.bad_callee_names:
            score *= cfg.bad_callee_weight
            v.notes.append(f"BAD_CALLEE({c})")
    for t in unresolved:
        score *= cfg.unresolved_call_weight
        v.notes.append(f"UNRESOLVED_CALL({t})")
    v.score = score
    return v


def triage_corpus(
    units: list[SourceUnit], cfg: TriageConfig | None = None
) -> list[TriageVerdict]:
    """Verdicts for every function, ranked: score desc, asserts desc, name asc."""
    cfg = cfg or TriageConfig()
    facts = [f for u in units for f in extract_facts(u, cfg.assert_macro_names)]
    graph = build_call_graph(units, facts)
    verdicts = [triage_function(f, graph, cfg) for f in facts]
    verdicts.sort(key=lambda v: (-v.score, -v.assert_sites, v.function))
    return verdicts
