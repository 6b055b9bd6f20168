"""C-subset source model: parsing, type resolution, facts, call graph."""

from . import cast
from .callgraph import CallGraph, build_call_graph
from .facts import DEFAULT_ASSERT_MACROS, FunctionFacts, Site, extract_facts
from .parser import parse_unit
from .render import render_expr
from .types import GroundType, parse_type_text, resolve_type, resolve_type_expr

__all__ = [
    "cast",
    "CallGraph",
    "build_call_graph",
    "DEFAULT_ASSERT_MACROS",
    "FunctionFacts",
    "Site",
    "extract_facts",
    "parse_unit",
    "render_expr",
    "GroundType",
    "parse_type_text",
    "resolve_type",
    "resolve_type_expr",
]
