"""Built-in trace drivers: seeded random testing run through the interpreter.

Each driver mirrors, draw for draw, the corresponding C driver shipped with
the fixture corpus, so a trace produced here is byte-identical to one
produced by the compiled fixture under the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import Program, Trap
from .traces import TraceRecord

LCG_MUL = 6364136223846793005
LCG_INC = 1442695040888963407
M64 = (1 << 64) - 1


class Lcg:
    """The shared 64-bit linear congruential generator (top 31 bits used)."""

    def __init__(self, seed: int):
        self.state = seed & M64

    def next(self) -> int:
        self.state = (self.state * LCG_MUL + LCG_INC) & M64
        return self.state >> 33

    def rand(self, n: int) -> int:
        return self.next() % n


@dataclass
class DriverOutcome:
    records: list[TraceRecord] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    ops_run: int = 0

    @property
    def clean(self) -> bool:
        return not self.failures


def run_bintree_tester(
    prog: Program, seed: int, num_tests: int = 5000, max_len: int = 4
) -> DriverOutcome:
    """Random op sequences against the tree; repOK checked after every op."""
    out = DriverOutcome()
    rng = Lcg(seed)
    prog.rt.trace_to(out.records)
    try:
        for t in range(num_tests):
            prog.call("tree_clear")
            if "nf_reset" in prog.F:
                prog.call("nf_reset")
            ln = 1 + rng.rand(max_len)
            for i in range(ln):
                op = rng.rand(3)
                v = rng.rand(20)
                try:
                    if op == 0:
                        prog.call("add", v)
                    elif op == 1:
                        prog.call("remove", v)
                    else:
                        prog.call("find", v)
                except Trap as trap:
                    out.failures.append(
                        {"test": t, "step": i, "op": op, "value": v, "kind": trap.kind}
                    )
                out.ops_run += 1
                if prog.call("repOK") == 0:
                    out.failures.append(
                        {"test": t, "step": i, "op": op, "value": v, "kind": "state_check"}
                    )
    finally:
        prog.rt.trace = None
    return out


def run_minutes_sweep(prog: Program, seed: int, num_draws: int = 10000) -> DriverOutcome:
    """Uniform draws over the observed operating range; m == 1 never occurs."""
    out = DriverOutcome()
    rng = Lcg(seed)
    prog.rt.trace_to(out.records)
    try:
        for i in range(num_draws):
            m = rng.rand(1440)
            if m == 1:
                continue
            try:
                prog.call("to_millis", m)
            except Trap as trap:
                out.failures.append({"draw": i, "m": m, "kind": trap.kind})
            out.ops_run += 1
    finally:
        prog.rt.trace = None
    return out


def run_bmh_tester(prog: Program, seed: int, num_tests: int = 2000) -> DriverOutcome:
    """Random text/pattern searches through the equivalence checker."""
    out = DriverOutcome()
    rng = Lcg(seed)
    prog.rt.trace_to(out.records)
    try:
        for t in range(num_tests):
            tl = rng.rand(7)
            pl = 1 + rng.rand(3)
            text = [rng.rand(4) for _ in range(tl)]
            pat = [rng.rand(4) for _ in range(pl)]
            start = rng.rand(3)
            try:
                prog.call("check_bmh", text, tl, pat, pl, start)
            except Trap as trap:
                out.failures.append(
                    {"test": t, "text": text, "pat": pat, "start": start, "kind": trap.kind}
                )
            out.ops_run += 1
    finally:
        prog.rt.trace = None
    return out


DRIVERS = {
    "bintree_random": run_bintree_tester,
    "minutes_sweep": run_minutes_sweep,
    "bmh_random": run_bmh_tester,
}
