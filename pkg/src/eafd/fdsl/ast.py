"""Typed AST for the feature expression language.

Nodes are frozen dataclasses; structural equality is dataclass equality.
Every candidate feature is one expression tree evaluating to a single
scalar per sequence (or a missing value).
"""

from __future__ import annotations

from dataclasses import dataclass, field

WINDOW_ALL = "all"
WINDOW_LAST_DAYS = "last_days"
WINDOW_LAST_EVENTS = "last_events"

SECONDS_PER_DAY = 86400.0

#: aggregator name -> (field kind or None, extra named params)
#: field kind: "numeric", "categorical", or None for field-free aggregators
AGGREGATORS: dict[str, dict] = {
    "count": {"field": None, "params": ()},
    "sum": {"field": "numeric", "params": ()},
    "mean": {"field": "numeric", "params": ()},
    "std": {"field": "numeric", "params": ()},
    "min": {"field": "numeric", "params": ()},
    "max": {"field": "numeric", "params": ()},
    "median": {"field": "numeric", "params": ()},
    "nunique": {"field": "categorical", "params": ()},
    "entropy": {"field": "categorical", "params": ()},
    "hhi": {"field": "categorical", "params": ()},
    "span_days": {"field": None, "params": ()},
    "recency_days": {"field": None, "params": ()},
    "mean_interevent_days": {"field": None, "params": ()},
    "std_interevent_days": {"field": None, "params": ()},
    "burstiness": {"field": None, "params": ()},
    "ewma": {"field": "numeric", "params": ("halflife_days",)},
    "autocorr": {"field": "numeric", "params": ("lag",)},
    "trend_per_day": {"field": "numeric", "params": ()},
}

UNARY_FUNCTIONS = ("log1p", "abs", "sqrt", "clip")
ARITH_OPS = ("+", "-", "*", "/")
NUMERIC_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
CATEGORICAL_CMP_OPS = ("==", "!=")


class DslValueError(ValueError):
    """Invalid node construction (bad parameter domain, etc.)."""


@dataclass(frozen=True)
class Window:
    kind: str = WINDOW_ALL
    k: float | None = None

    def __post_init__(self):
        if self.kind == WINDOW_ALL:
            if self.k is not None:
                raise DslValueError("window 'all' takes no parameter")
        elif self.kind == WINDOW_LAST_DAYS:
            if self.k is None or not self.k > 0:
                raise DslValueError("last_days window needs k > 0")
            object.__setattr__(self, "k", float(self.k))
        elif self.kind == WINDOW_LAST_EVENTS:
            if self.k is None or self.k != int(self.k) or int(self.k) <= 0:
                raise DslValueError("last_events window needs integer k > 0")
            object.__setattr__(self, "k", int(self.k))
        else:
            raise DslValueError(f"unknown window kind {self.kind!r}")


WINDOW_ALL_INSTANCE = Window(WINDOW_ALL)


# --- predicates -------------------------------------------------------------


@dataclass(frozen=True)
class Cmp:
    field: str
    op: str
    value: float | str

    def __post_init__(self):
        if isinstance(self.value, str):
            if self.op not in CATEGORICAL_CMP_OPS:
                raise DslValueError(f"operator {self.op!r} not valid for category literals")
        else:
            if self.op not in NUMERIC_CMP_OPS:
                raise DslValueError(f"unknown comparison operator {self.op!r}")
            object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class InSet:
    field: str
    values: tuple[str, ...]

    def __post_init__(self):
        if not self.values:
            raise DslValueError("in-set predicate needs at least one value")
        # canonical: sorted, duplicate-free; keeps round-trips idempotent
        object.__setattr__(self, "values", tuple(sorted(set(self.values))))


@dataclass(frozen=True)
class Not:
    child: "PredicateNode"


@dataclass(frozen=True)
class And:
    lhs: "PredicateNode"
    rhs: "PredicateNode"


@dataclass(frozen=True)
class Or:
    lhs: "PredicateNode"
    rhs: "PredicateNode"


PredicateNode = Cmp | InSet | Not | And | Or


# --- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Agg:
    name: str
    field: str | None = None
    predicate: PredicateNode | None = None
    window: Window = WINDOW_ALL_INSTANCE
    halflife_days: float | None = None
    lag: int | None = None

    def __post_init__(self):
        spec = AGGREGATORS.get(self.name)
        if spec is None:
            raise DslValueError(f"unknown aggregator {self.name!r}")
        if spec["field"] is None and self.field is not None:
            raise DslValueError(f"{self.name} takes no field")
        if spec["field"] is not None and self.field is None:
            raise DslValueError(f"{self.name} requires a field")
        if self.halflife_days is not None:
            if "halflife_days" not in spec["params"]:
                raise DslValueError(f"{self.name} takes no halflife_days")
            if not self.halflife_days > 0:
                raise DslValueError("halflife_days must be > 0")
            object.__setattr__(self, "halflife_days", float(self.halflife_days))
        if self.lag is not None:
            if "lag" not in spec["params"]:
                raise DslValueError(f"{self.name} takes no lag")
            if self.lag != int(self.lag) or int(self.lag) < 1:
                raise DslValueError("lag must be an integer >= 1")
            object.__setattr__(self, "lag", int(self.lag))
        if "halflife_days" in spec["params"] and self.halflife_days is None:
            raise DslValueError(f"{self.name} requires halflife_days")
        if "lag" in spec["params"] and self.lag is None:
            raise DslValueError(f"{self.name} requires lag")


@dataclass(frozen=True)
class Arith:
    op: str
    lhs: "ExprNode"
    rhs: "ExprNode"

    def __post_init__(self):
        if self.op not in ARITH_OPS:
            raise DslValueError(f"unknown arithmetic operator {self.op!r}")


@dataclass(frozen=True)
class Unary:
    fn: str
    child: "ExprNode"
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        if self.fn not in UNARY_FUNCTIONS:
            raise DslValueError(f"unknown function {self.fn!r}")
        if self.fn == "clip":
            if self.lo is None or self.hi is None:
                raise DslValueError("clip requires lo and hi bounds")
            if not float(self.lo) <= float(self.hi):
                raise DslValueError("clip bounds must satisfy lo <= hi")
            object.__setattr__(self, "lo", float(self.lo))
            object.__setattr__(self, "hi", float(self.hi))
        elif self.lo is not None or self.hi is not None:
            raise DslValueError(f"{self.fn} takes no bounds")


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        v = float(self.value)
        if v != v or v in (float("inf"), float("-inf")):
            raise DslValueError("constants must be finite")
        object.__setattr__(self, "value", v)


ExprNode = Agg | Arith | Unary | Const
FeatureExpr = ExprNode


def walk(expr: ExprNode):
    """Yield every expression node, depth-first."""
    yield expr
    if isinstance(expr, Arith):
        yield from walk(expr.lhs)
        yield from walk(expr.rhs)
    elif isinstance(expr, Unary):
        yield from walk(expr.child)


def predicate_fields(pred: PredicateNode | None):
    if pred is None:
        return
    if isinstance(pred, (Cmp, InSet)):
        yield pred.field
    elif isinstance(pred, Not):
        yield from predicate_fields(pred.child)
    else:
        yield from predicate_fields(pred.lhs)
        yield from predicate_fields(pred.rhs)


def referenced_fields(expr: ExprNode):
    """All schema fields the expression touches, including in predicates."""
    for node in walk(expr):
        if isinstance(node, Agg):
            if node.field is not None:
                yield node.field
            yield from predicate_fields(node.predicate)
