"""Trace ingestion: newline-delimited JSON records into a per-point column store.

Wire format, one record per line:
    {"pp": "add:exit:0", "vars": {"br0": 1, "br1": 0}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import FormatError

DEFAULT_MALFORMED_THRESHOLD = 0.10
I64_MIN, I64_MAX = -(2**63), 2**63 - 1


@dataclass
class TraceRecord:
    pp: str
    vars: dict[str, int]

    def to_line(self) -> str:
        return json.dumps({"pp": self.pp, "vars": self.vars}, separators=(",", ":"))


@dataclass
class SampleStore:
    columns: dict[str, dict[str, list[int]]] = field(default_factory=dict)  # pp -> var -> values
    counts: dict[str, int] = field(default_factory=dict)
    skipped: int = 0

    def record_count(self, pp: str) -> int:
        return self.counts.get(pp, 0)

    @property
    def total_records(self) -> int:
        return sum(self.counts.values())

    def points(self) -> list[str]:
        return sorted(self.columns)

    def variables(self, pp: str) -> list[str]:
        return sorted(self.columns.get(pp, ()))

    def values(self, pp: str, var: str) -> list[int]:
        return self.columns[pp][var]

    def add(self, rec: TraceRecord) -> bool:
        """Append one record; False (skipped) if its keys clash with the point's."""
        cols = self.columns.get(rec.pp)
        if cols is None:
            self.columns[rec.pp] = {k: [v] for k, v in rec.vars.items()}
            self.counts[rec.pp] = 1
            return True
        if set(cols) != set(rec.vars):
            return False
        for k, v in rec.vars.items():
            cols[k].append(v)
        self.counts[rec.pp] += 1
        return True

    def merge(self, other: "SampleStore") -> None:
        for pp, cols in other.columns.items():
            mine = self.columns.setdefault(pp, {k: [] for k in cols})
            if set(mine) != set(cols):
                raise FormatError(f"column mismatch for {pp} during merge")
            for var, vals in cols.items():
                mine[var].extend(vals)
            self.counts[pp] = self.counts.get(pp, 0) + other.counts[pp]
        self.skipped += other.skipped

    def records(self) -> Iterator[TraceRecord]:
        """Reconstruct records per point, in ingestion order within each point."""
        for pp in self.points():
            cols = self.columns[pp]
            names = list(cols)
            for i in range(self.counts[pp]):
                yield TraceRecord(pp, {n: cols[n][i] for n in names})

    def serialize(self) -> str:
        return "".join(r.to_line() + "\n" for r in self.records())


def _parse_line(line: str) -> TraceRecord | None:
    try:
        d = json.loads(line)
    except json.JSONDecodeError:
        return None
    if not isinstance(d, dict) or not isinstance(d.get("pp"), str):
        return None
    vars_ = d.get("vars")
    if not isinstance(vars_, dict):
        return None
    out: dict[str, int] = {}
    for k, v in vars_.items():
        if not isinstance(k, str) or isinstance(v, bool) or not isinstance(v, int):
            return None
        if not (I64_MIN <= v <= I64_MAX):
            return None
        out[k] = v
    return TraceRecord(d["pp"], out)


def ingest(
    source: str | Path | Iterable[str],
    malformed_threshold: float = DEFAULT_MALFORMED_THRESHOLD,
) -> SampleStore:
    """Load a trace stream; malformed lines are counted and skipped.

    Raises FormatError when more than `malformed_threshold` of nonempty
    lines are malformed, and OSError for unreadable paths.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return ingest(list(fh), malformed_threshold)
    store = SampleStore()
    total = 0
    for line in source:
        line = line.strip()
        if not line:
            continue
        total += 1
        rec = _parse_line(line)
        if rec is None or not store.add(rec):
            store.skipped += 1
    if total and store.skipped / total > malformed_threshold:
        raise FormatError(
            f"{store.skipped}/{total} malformed lines exceeds threshold {malformed_threshold:.0%}"
        )
    return store
