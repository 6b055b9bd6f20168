"""Corpus-wide call graph and recursion flags."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import cast as A
from .facts import FunctionFacts, extract_facts


@dataclass
class CallGraph:
    nodes: set[str] = field(default_factory=set)
    edges: dict[str, set[str]] = field(default_factory=dict)
    unresolved_calls: list[tuple[str, str]] = field(default_factory=list)  # (caller, target-or-'?')
    recursive: set[str] = field(default_factory=set)

    def callees(self, name: str) -> set[str]:
        return self.edges.get(name, set())

    def is_recursive(self, name: str) -> bool:
        return name in self.recursive

    def reachable(self, start: str) -> set[str]:
        out: set[str] = set()
        stack = [start]
        while stack:
            n = stack.pop()
            for m in sorted(self.edges.get(n, ())):
                if m not in out:
                    out.add(m)
                    stack.append(m)
        return out


def build_call_graph(
    units: list[A.SourceUnit], facts: list[FunctionFacts] | None = None
) -> CallGraph:
    """Merge per-unit facts into one graph; targets not defined anywhere are unresolved."""
    if facts is None:
        facts = [f for u in units for f in extract_facts(u)]
    g = CallGraph()
    g.nodes = {f.name for f in facts}
    for f in facts:
        targets = g.edges.setdefault(f.name, set())
        for c in f.callees:
            if c in g.nodes:
                targets.add(c)
            else:
                g.unresolved_calls.append((f.name, c))
        for _loc in f.unresolved_call_sites:
            g.unresolved_calls.append((f.name, "?"))
    for n in sorted(g.nodes):
        if n in g.reachable(n):
            g.recursive.add(n)
    for f in facts:
        f.is_recursive = f.name in g.recursive
    return g
