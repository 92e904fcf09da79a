"""Deliberately naive reference interpreter for the feature language.

Written with plain Python loops and the math/statistics toolkit, with no
code shared with the vectorized evaluator. Used as the oracle side of
the evaluator-equivalence checks: keep it simple and obviously correct,
not fast.
"""

from __future__ import annotations

import math
from collections import Counter

from eafd.dataset.schema import MISSING_CATEGORY
from eafd.fdsl import ast as A

DAY = 86400.0
MISSING = None  # the oracle models missing as None


def _events(seq):
    """Sequence as a list of per-event dicts (None marks a missing value)."""
    out = []
    for i in range(len(seq)):
        ev = {"__t__": float(seq.timestamps[i])}
        for name, col in seq.categorical.items():
            ev[name] = None if int(col[i]) == MISSING_CATEGORY else int(col[i])
        for name, col in seq.numeric.items():
            v = float(col[i])
            ev[name] = None if math.isnan(v) else v
        out.append(ev)
    return out


def _category_code(schema, field, value):
    vocab = schema.vocabulary(field)
    return vocab.index(value) if value in vocab else None


def _match(pred, ev, schema) -> bool:
    if isinstance(pred, A.Cmp):
        v = ev[pred.field]
        if v is None:
            return False
        if isinstance(pred.value, str):
            code = _category_code(schema, pred.field, pred.value)
            if pred.op == "==":
                return code is not None and v == code
            return code is None or v != code
        if pred.op == "==":
            return v == pred.value
        if pred.op == "!=":
            return v != pred.value
        if pred.op == "<":
            return v < pred.value
        if pred.op == "<=":
            return v <= pred.value
        if pred.op == ">":
            return v > pred.value
        return v >= pred.value
    if isinstance(pred, A.InSet):
        v = ev[pred.field]
        if v is None:
            return False
        codes = {_category_code(schema, pred.field, s) for s in pred.values}
        return v in codes
    if isinstance(pred, A.Not):
        return not _match(pred.child, ev, schema)
    if isinstance(pred, A.And):
        return _match(pred.lhs, ev, schema) and _match(pred.rhs, ev, schema)
    return _match(pred.lhs, ev, schema) or _match(pred.rhs, ev, schema)


def _select(agg, events, schema):
    if not events:
        return []
    anchor = events[-1]["__t__"]
    if agg.window.kind == "all":
        chosen = list(events)
    elif agg.window.kind == "last_days":
        cutoff = anchor - agg.window.k * DAY
        chosen = [e for e in events if e["__t__"] >= cutoff]
    else:
        chosen = events[-int(agg.window.k) :]
    if agg.predicate is not None:
        chosen = [e for e in chosen if _match(agg.predicate, e, schema)]
    return chosen


def _pmean(xs):
    return math.fsum(xs) / len(xs)


def _pstd(xs):
    m = _pmean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / len(xs))


def _agg_value(agg, events, schema):
    sel = _select(agg, events, schema)
    name = agg.name
    if name == "count":
        return float(len(sel))
    if name == "recency_days":
        if not sel:
            return MISSING
        return (events[-1]["__t__"] - sel[-1]["__t__"]) / DAY
    if name in ("span_days", "mean_interevent_days", "std_interevent_days", "burstiness"):
        if len(sel) < 2:
            return MISSING
        ts = [e["__t__"] for e in sel]
        if name == "span_days":
            return (ts[-1] - ts[0]) / DAY
        gaps = [(b - a) / DAY for a, b in zip(ts, ts[1:])]
        if name == "mean_interevent_days":
            return _pmean(gaps)
        if name == "std_interevent_days":
            return _pstd(gaps)
        mu, sigma = _pmean(gaps), _pstd(gaps)
        if sigma + mu == 0.0:
            return 0.0
        return (sigma - mu) / (sigma + mu)
    if name in ("nunique", "entropy", "hhi"):
        ids = [e[agg.field] for e in sel if e[agg.field] is not None]
        if not ids:
            return MISSING
        counts = Counter(ids)
        total = len(ids)
        if name == "nunique":
            return float(len(counts))
        if name == "entropy":
            return -math.fsum((c / total) * math.log(c / total) for c in counts.values())
        return math.fsum((c / total) ** 2 for c in counts.values())

    pairs = [(e[agg.field], e["__t__"]) for e in sel if e[agg.field] is not None]
    vals = [v for v, _ in pairs]
    if name == "ewma":
        if not vals:
            return MISSING
        anchor = events[-1]["__t__"]
        weights = [2.0 ** (-((anchor - t) / DAY) / agg.halflife_days) for _, t in pairs]
        return math.fsum(w * v for w, (v, _) in zip(weights, pairs)) / math.fsum(weights)
    if name == "autocorr":
        if len(vals) <= agg.lag:
            return MISSING
        a, b = vals[agg.lag :], vals[: len(vals) - agg.lag]
        sa, sb = _pstd(a), _pstd(b)
        if sa == 0.0 or sb == 0.0:
            return MISSING
        ma, mb = _pmean(a), _pmean(b)
        cov = math.fsum((x - ma) * (y - mb) for x, y in zip(a, b)) / len(a)
        return cov / (sa * sb)
    if name == "trend_per_day":
        if len(vals) < 2:
            return MISSING
        td = [t / DAY for _, t in pairs]
        mt = _pmean(td)
        var_t = math.fsum((t - mt) ** 2 for t in td) / len(td)
        if var_t == 0.0:
            return MISSING
        mv = _pmean(vals)
        cov = math.fsum((t - mt) * (v - mv) for t, v in zip(td, vals)) / len(td)
        return cov / var_t

    if not vals:
        return MISSING
    if name == "sum":
        return math.fsum(vals)
    if name == "mean":
        return _pmean(vals)
    if name == "std":
        return _pstd(vals)
    if name == "min":
        return min(vals)
    if name == "max":
        return max(vals)
    if name == "median":
        ordered = sorted(vals)
        mid = len(ordered) // 2
        if len(ordered) % 2:
            return ordered[mid]
        return (ordered[mid - 1] + ordered[mid]) / 2.0
    raise AssertionError(name)


def naive_evaluate(expr, seq, schema):
    """Evaluate an AST on one sequence; returns float or None for missing."""
    events = _events(seq)
    return _eval(expr, events, schema)


def _eval(expr, events, schema):
    if isinstance(expr, A.Const):
        return expr.value
    if isinstance(expr, A.Agg):
        return _agg_value(expr, events, schema)
    if isinstance(expr, A.Unary):
        x = _eval(expr.child, events, schema)
        if x is MISSING:
            return MISSING
        if expr.fn == "abs":
            return abs(x)
        if expr.fn == "sqrt":
            return math.sqrt(x) if x >= 0 else MISSING
        if expr.fn == "log1p":
            return math.log1p(x) if x > -1 else MISSING
        return min(max(x, expr.lo), expr.hi)
    if isinstance(expr, A.Arith):
        a = _eval(expr.lhs, events, schema)
        if a is MISSING:
            return MISSING
        b = _eval(expr.rhs, events, schema)
        if b is MISSING:
            return MISSING
        if expr.op == "+":
            out = a + b
        elif expr.op == "-":
            out = a - b
        elif expr.op == "*":
            out = a * b
        else:
            if b == 0.0:
                return MISSING
            out = a / b
        return out if math.isfinite(out) else MISSING
    raise AssertionError(type(expr))
