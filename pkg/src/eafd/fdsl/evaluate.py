"""Compilation and evaluation of feature expressions over event sequences.

Missing values are represented as NaN throughout: degenerate selections
(empty windows, too few events, zero variance, division by zero, domain
violations) all evaluate to missing rather than raising.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..dataset.core import Dataset, EventSequence
from ..dataset.schema import MISSING_CATEGORY, EventSchema
from .ast import (
    SECONDS_PER_DAY,
    WINDOW_ALL,
    WINDOW_LAST_DAYS,
    WINDOW_LAST_EVENTS,
    Agg,
    And,
    Arith,
    Cmp,
    Const,
    ExprNode,
    InSet,
    Not,
    Or,
    PredicateNode,
    Unary,
)
from .categories import tag_category
from .parser import parse
from .printer import canonical_print
from .typecheck import type_check

_TIME_AGGS = frozenset(
    {"count", "span_days", "recency_days", "mean_interevent_days", "std_interevent_days", "burstiness"}
)


@dataclass(frozen=True)
class CompiledFeature:
    """A type-checked expression bound to its schema, with canonical identity."""

    text: str
    expr: ExprNode
    category: str
    schema: EventSchema

    def evaluate(self, sequence: EventSequence) -> float:
        return evaluate_feature(self, sequence)


def compile_feature(
    source: str | ExprNode, schema: EventSchema, category: str | None = None
) -> CompiledFeature:
    expr = parse(source, schema) if isinstance(source, str) else source
    if not isinstance(source, str):
        type_check(expr, schema)
    return CompiledFeature(
        text=canonical_print(expr),
        expr=expr,
        category=category or tag_category(expr, schema),
        schema=schema,
    )


# --- per-sequence evaluation -------------------------------------------------


def _predicate_mask(pred: PredicateNode, seq: EventSequence, idx: np.ndarray, schema: EventSchema) -> np.ndarray:
    """Boolean mask over the events indexed by ``idx``; missing values never match."""
    if isinstance(pred, Cmp):
        if isinstance(pred.value, str):
            ids = seq.categorical[pred.field][idx].astype(np.int64)
            valid = ids != MISSING_CATEGORY
            vocab = schema.vocabulary(pred.field)
            code = vocab.index(pred.value) if pred.value in vocab else -1
            if pred.op == "==":
                return valid & (ids == code)
            return valid & (ids != code)
        col = seq.numeric[pred.field][idx]
        valid = ~np.isnan(col)
        v = pred.value
        if pred.op == "==":
            res = col == v
        elif pred.op == "!=":
            res = col != v
        elif pred.op == "<":
            res = col < v
        elif pred.op == "<=":
            res = col <= v
        elif pred.op == ">":
            res = col > v
        else:
            res = col >= v
        return valid & res
    if isinstance(pred, InSet):
        ids = seq.categorical[pred.field][idx].astype(np.int64)
        vocab = schema.vocabulary(pred.field)
        codes = [vocab.index(v) for v in pred.values if v in vocab]
        if not codes:
            return np.zeros(idx.size, dtype=bool)
        return np.isin(ids, codes)
    if isinstance(pred, Not):
        return ~_predicate_mask(pred.child, seq, idx, schema)
    if isinstance(pred, And):
        return _predicate_mask(pred.lhs, seq, idx, schema) & _predicate_mask(pred.rhs, seq, idx, schema)
    return _predicate_mask(pred.lhs, seq, idx, schema) | _predicate_mask(pred.rhs, seq, idx, schema)


def _selection(agg: Agg, seq: EventSequence, schema: EventSchema) -> np.ndarray:
    """Indices of events inside the window that match the predicate."""
    n = len(seq)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    w = agg.window
    if w.kind == WINDOW_ALL:
        idx = np.arange(n, dtype=np.int64)
    elif w.kind == WINDOW_LAST_DAYS:
        anchor = seq.timestamps[-1]
        cutoff = anchor - w.k * SECONDS_PER_DAY
        start = int(np.searchsorted(seq.timestamps, cutoff, side="left"))
        idx = np.arange(start, n, dtype=np.int64)
    else:  # last_events
        start = max(0, n - int(w.k))
        idx = np.arange(start, n, dtype=np.int64)
    if agg.predicate is not None and idx.size:
        idx = idx[_predicate_mask(agg.predicate, seq, idx, schema)]
    return idx


def _pop_std(values: np.ndarray) -> float:
    return float(np.sqrt(np.mean((values - values.mean()) ** 2)))


def _eval_agg(agg: Agg, seq: EventSequence, schema: EventSchema) -> float:
    idx = _selection(agg, seq, schema)
    name = agg.name
    if name == "count":
        return float(idx.size)

    ts = seq.timestamps
    if name in ("span_days", "recency_days", "mean_interevent_days", "std_interevent_days", "burstiness"):
        if name == "recency_days":
            if idx.size == 0:
                return np.nan
            return float((ts[-1] - ts[idx[-1]]) / SECONDS_PER_DAY)
        if idx.size < 2:
            return np.nan
        sel_t = ts[idx]
        if name == "span_days":
            return float((sel_t[-1] - sel_t[0]) / SECONDS_PER_DAY)
        gaps = np.diff(sel_t) / SECONDS_PER_DAY
        if name == "mean_interevent_days":
            return float(gaps.mean())
        if name == "std_interevent_days":
            return _pop_std(gaps)
        mu = float(gaps.mean())
        sigma = _pop_std(gaps)
        denom = sigma + mu
        if denom == 0.0:
            return 0.0
        return (sigma - mu) / denom

    if name in ("nunique", "entropy", "hhi"):
        ids = seq.categorical[agg.field][idx]
        ids = ids[ids != MISSING_CATEGORY]
        if ids.size == 0:
            return np.nan
        _, counts = np.unique(ids, return_counts=True)
        if name == "nunique":
            return float(counts.size)
        p = counts / counts.sum()
        if name == "entropy":
            return float(-(p * np.log(p)).sum())
        return float((p * p).sum())

    # numeric-field aggregators: drop events whose field value is missing
    col = seq.numeric[agg.field][idx]
    keep = ~np.isnan(col)
    vals = col[keep]
    if name == "ewma":
        if vals.size == 0:
            return np.nan
        anchor = ts[-1]
        age_days = (anchor - ts[idx][keep]) / SECONDS_PER_DAY
        w = np.exp2(-age_days / agg.halflife_days)
        return float((w * vals).sum() / w.sum())
    if name == "autocorr":
        lag = agg.lag
        if vals.size <= lag:
            return np.nan
        a, b = vals[lag:], vals[:-lag]
        sa, sb = _pop_std(a), _pop_std(b)
        if sa == 0.0 or sb == 0.0:
            return np.nan
        cov = float(np.mean((a - a.mean()) * (b - b.mean())))
        return cov / (sa * sb)
    if name == "trend_per_day":
        if vals.size < 2:
            return np.nan
        td = ts[idx][keep] / SECONDS_PER_DAY
        var_t = float(np.mean((td - td.mean()) ** 2))
        if var_t == 0.0:
            return np.nan
        cov = float(np.mean((td - td.mean()) * (vals - vals.mean())))
        return cov / var_t

    if vals.size == 0:
        return np.nan
    if name == "sum":
        return float(vals.sum())
    if name == "mean":
        return float(vals.mean())
    if name == "std":
        return _pop_std(vals)
    if name == "min":
        return float(vals.min())
    if name == "max":
        return float(vals.max())
    if name == "median":
        return float(np.median(vals))
    raise AssertionError(f"unhandled aggregator {name}")  # pragma: no cover


def _eval_expr(expr: ExprNode, seq: EventSequence, schema: EventSchema) -> float:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Agg):
        return _eval_agg(expr, seq, schema)
    if isinstance(expr, Unary):
        x = _eval_expr(expr.child, seq, schema)
        if np.isnan(x):
            return np.nan
        if expr.fn == "abs":
            return abs(x)
        if expr.fn == "sqrt":
            return float(np.sqrt(x)) if x >= 0 else np.nan
        if expr.fn == "log1p":
            return float(np.log1p(x)) if x > -1 else np.nan
        return float(min(max(x, expr.lo), expr.hi))
    if isinstance(expr, Arith):
        a = _eval_expr(expr.lhs, seq, schema)
        if np.isnan(a):
            return np.nan
        b = _eval_expr(expr.rhs, seq, schema)
        if np.isnan(b):
            return np.nan
        if expr.op == "+":
            out = a + b
        elif expr.op == "-":
            out = a - b
        elif expr.op == "*":
            out = a * b
        else:
            if b == 0.0:
                return np.nan
            out = a / b
        return out if np.isfinite(out) else np.nan
    raise TypeError(f"unknown expression node {type(expr)}")


def evaluate_feature(compiled: CompiledFeature, sequence: EventSequence) -> float:
    """Evaluate one feature on one sequence; NaN encodes a missing result."""
    return _eval_expr(compiled.expr, sequence, compiled.schema)


@dataclass(frozen=True)
class FeatureMatrix:
    """n_sequences x n_features values with an explicit missing mask."""

    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != len(self.names):
            raise ValueError("values shape does not match names")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]


def evaluate_batch(
    compiled_list: list[CompiledFeature],
    dataset: Dataset,
    workers: int = 1,
) -> FeatureMatrix:
    """Evaluate every feature over every sequence.

    Output is a pure function of (dataset, features): rows are written at
    fixed indices, so the worker count never changes the result.
    """
    n = dataset.n_sequences
    m = len(compiled_list)
    values = np.full((n, m), np.nan, dtype=np.float64)
    schema = dataset.schema

    def fill(rows: range) -> None:
        for i in rows:
            seq = dataset.sequences[i]
            for j, feat in enumerate(compiled_list):
                values[i, j] = _eval_expr(feat.expr, seq, schema)

    if workers <= 1 or n < 2 * workers:
        fill(range(n))
    else:
        chunk = (n + workers - 1) // workers
        ranges = [range(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, ranges))
    return FeatureMatrix(values, tuple(f.text for f in compiled_list))
