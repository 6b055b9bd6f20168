"""Likely-invariant inference over trace samples.

Per program point and variable, the strongest matching shape is kept:
Constant beats OneOf beats Range. NonZero is an independent predicate and
Linear relates variable pairs at the same point. Inference is a function of
the sample multiset only, so record order never changes the result.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InsufficientSupport
from .traces import SampleStore

FORM_ORDER = {"constant": 0, "one_of": 1, "range": 2, "nonzero": 3, "linear": 4}


@dataclass(frozen=True)
class InferenceConfig:
    min_support: int = 5
    one_of_cap: int = 3
    linear_max_slope: int = 16
    linear_max_intercept: int = 2**20
    require_support: bool = False  # raise instead of skipping thin points


@dataclass(frozen=True)
class Invariant:
    pp: str
    form: str  # 'constant' | 'one_of' | 'range' | 'nonzero' | 'linear'
    var: str  # for linear: the dependent variable y
    support: int
    value: int | None = None  # constant
    values: tuple[int, ...] = ()  # one_of, sorted
    lo: int | None = None  # range
    hi: int | None = None
    var_x: str | None = None  # linear: y == a*x + b
    a: int | None = None
    b: int | None = None

    def eval(self, env: dict[str, int]) -> bool:
        v = env[self.var]
        if self.form == "constant":
            return v == self.value
        if self.form == "one_of":
            return v in self.values
        if self.form == "range":
            return self.lo <= v <= self.hi
        if self.form == "nonzero":
            return v != 0
        if self.form == "linear":
            return v == self.a * env[self.var_x] + self.b
        raise ValueError(self.form)

    @property
    def variables(self) -> tuple[str, ...]:
        return (self.var,) if self.var_x is None else (self.var_x, self.var)

    def to_dict(self) -> dict:
        d: dict = {"pp": self.pp, "form": self.form, "var": self.var, "support": self.support}
        if self.form == "constant":
            d["value"] = self.value
        elif self.form == "one_of":
            d["values"] = list(self.values)
        elif self.form == "range":
            d["lo"], d["hi"] = self.lo, self.hi
        elif self.form == "linear":
            d["var_x"], d["a"], d["b"] = self.var_x, self.a, self.b
        return d

    @staticmethod
    def from_dict(d: dict) -> "Invariant":
        return Invariant(
            pp=d["pp"],
            form=d["form"],
            var=d["var"],
            support=d["support"],
            value=d.get("value"),
            values=tuple(d.get("values", ())),
            lo=d.get("lo"),
            hi=d.get("hi"),
            var_x=d.get("var_x"),
            a=d.get("a"),
            b=d.get("b"),
        )


def render_condition(inv: Invariant) -> str:
    if inv.form == "constant":
        return f"({inv.var}=={inv.value})"
    if inv.form == "one_of":
        return "(" + "||".join(f"{inv.var}=={v}" for v in inv.values) + ")"
    if inv.form == "range":
        return f"({inv.lo}<={inv.var} && {inv.var}<={inv.hi})"
    if inv.form == "nonzero":
        return f"({inv.var}!=0)"
    if inv.form == "linear":
        b = inv.b or 0
        tail = f"+{b}" if b >= 0 else f"-{-b}"
        return f"({inv.var}=={inv.a}*{inv.var_x}{tail})"
    raise ValueError(inv.form)


def widen_to_range(inv: Invariant) -> Invariant:
    """Constant/OneOf relaxed to their bounding Range; other forms unchanged."""
    if inv.form == "constant":
        return Invariant(inv.pp, "range", inv.var, inv.support, lo=inv.value, hi=inv.value)
    if inv.form == "one_of":
        return Invariant(
            inv.pp, "range", inv.var, inv.support, lo=min(inv.values), hi=max(inv.values)
        )
    return inv


def _shape(pp: str, var: str, vals: list[int], cfg: InferenceConfig) -> Invariant:
    distinct = sorted(set(vals))
    n = len(vals)
    if len(distinct) == 1:
        return Invariant(pp, "constant", var, n, value=distinct[0])
    if len(distinct) <= cfg.one_of_cap:
        return Invariant(pp, "one_of", var, n, values=tuple(distinct))
    return Invariant(pp, "range", var, n, lo=distinct[0], hi=distinct[-1])


def _fit_linear(
    pp: str, x: str, y: str, xs: list[int], ys: list[int], cfg: InferenceConfig
) -> Invariant | None:
    pairs = sorted(zip(xs, ys))
    base_x, base_y = pairs[0]
    other = next(((px, py) for px, py in pairs if px != base_x), None)
    if other is None:
        return None  # constant x never pins a unique slope
    dx, dy = other[0] - base_x, other[1] - base_y
    if dy % dx != 0:
        return None
    a = dy // dx
    if a == 0 or abs(a) > cfg.linear_max_slope:
        return None
    b = base_y - a * base_x
    if abs(b) > cfg.linear_max_intercept:
        return None
    if all(py == a * px + b for px, py in pairs):
        return Invariant(pp, "linear", y, len(pairs), var_x=x, a=a, b=b)
    return None


def infer_point(store: SampleStore, pp: str, cfg: InferenceConfig | None = None) -> list[Invariant]:
    """Invariants for a single program point; raises when support is too thin."""
    cfg = cfg or InferenceConfig()
    n = store.record_count(pp)
    if n < cfg.min_support:
        raise InsufficientSupport(pp, n, cfg.min_support)
    out: list[Invariant] = []
    shapes: dict[str, Invariant] = {}
    for var in store.variables(pp):
        vals = store.values(pp, var)
        inv = _shape(pp, var, vals, cfg)
        shapes[var] = inv
        out.append(inv)
        if inv.form != "constant" and 0 not in vals:
            out.append(Invariant(pp, "nonzero", var, n))
    names = store.variables(pp)
    for i, x in enumerate(names):
        for y in names[i + 1 :]:
            if shapes[x].form == "constant" or shapes[y].form == "constant":
                continue
            fit = _fit_linear(pp, x, y, store.values(pp, x), store.values(pp, y), cfg)
            if fit is not None:
                out.append(fit)
    out.sort(key=lambda i: (i.pp, FORM_ORDER[i.form], i.var, i.var_x or ""))
    return out


def infer(store: SampleStore, cfg: InferenceConfig | None = None) -> list[Invariant]:
    """All invariants holding over every sample of sufficiently traced points."""
    cfg = cfg or InferenceConfig()
    out: list[Invariant] = []
    for pp in store.points():
        if store.record_count(pp) < cfg.min_support:
            if cfg.require_support:
                raise InsufficientSupport(pp, store.record_count(pp), cfg.min_support)
            continue
        out.extend(infer_point(store, pp, cfg))
    out.sort(key=lambda i: (i.pp, FORM_ORDER[i.form], i.var, i.var_x or ""))
    return out


def by_point(invs: list[Invariant]) -> dict[str, list[Invariant]]:
    d: dict[str, list[Invariant]] = {}
    for i in invs:
        d.setdefault(i.pp, []).append(i)
    return d
