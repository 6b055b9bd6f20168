import json
from pathlib import Path

import pytest

from needlefinder.engine import Program
from needlefinder.instrument import instrument_source
from needlefinder.source_model import parse_unit

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
SRC = CORPUS / "src"
TRACES = CORPUS / "traces"


def read_fixture(name: str) -> str:
    return (SRC / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def manifest() -> dict:
    return json.loads((CORPUS / "corpus.json").read_text(encoding="utf-8"))


def fixture_entry(manifest: dict, name: str) -> dict:
    return next(fx for fx in manifest["fixtures"] if fx["name"] == name)


_instr_cache: dict[str, object] = {}


def instrumented(name: str, functions: list[str]):
    """Session-cached instrumented source for a corpus file."""
    key = f"{name}:{','.join(functions)}"
    if key not in _instr_cache:
        _instr_cache[key] = instrument_source(read_fixture(name), name, functions=functions)
    return _instr_cache[key]


def program_for(name: str, functions: list[str]) -> Program:
    """A fresh interpreter over the instrumented unit (mutable state per test)."""
    return Program(instrumented(name, functions).parse())


def parse_fixture(name: str):
    return parse_unit(read_fixture(name), name)
