"""Shared exception types."""

from __future__ import annotations


class NeedlefinderError(Exception):
    """Base class for all tool errors."""


class ParseError(NeedlefinderError):
    def __init__(self, location: tuple[int, int], message: str):
        self.location = location
        self.message = message
        super().__init__(f"{location[0]}:{location[1]}: {message}")


class TypedefCycle(NeedlefinderError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"typedef cycle through {name!r}")


class UnsupportedConstruct(NeedlefinderError):
    """Raised inside a function body; degrades that function to opaque."""

    def __init__(self, location: tuple[int, int], what: str):
        self.location = location
        self.what = what
        super().__init__(f"{location[0]}:{location[1]}: unsupported construct: {what}")


class InsufficientSupport(NeedlefinderError):
    def __init__(self, pp: str, have: int, need: int):
        self.pp = pp
        self.have = have
        self.need = need
        super().__init__(f"{pp}: {have} records, need {need}")


class FormatError(NeedlefinderError):
    """Too many malformed lines in a trace stream."""


class UnrenderableInvariant(NeedlefinderError):
    def __init__(self, pp: str, var: str):
        self.pp = pp
        self.var = var
        super().__init__(f"invariant at {pp} references {var!r}, not in scope at the assume point")


class StageFailure(NeedlefinderError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
