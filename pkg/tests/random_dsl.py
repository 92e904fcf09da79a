"""Seeded random generators for expressions, sequences, and schemas.

Used by the round-trip and evaluator-equivalence harnesses; everything
is driven by an explicit numpy Generator so failures reproduce.
"""

from __future__ import annotations

import numpy as np

from eafd.dataset.core import EventSequence
from eafd.dataset.schema import (
    CATEGORICAL,
    MISSING_CATEGORY,
    NUMERIC,
    EventSchema,
    FieldSpec,
)
from eafd.fdsl import ast as A

TEST_SCHEMA = EventSchema(
    timestamp_field="t",
    fields=(
        FieldSpec("mcc", CATEGORICAL),
        FieldSpec("channel", CATEGORICAL),
        FieldSpec("amount", NUMERIC),
        FieldSpec("balance", NUMERIC),
    ),
    vocabularies={
        "mcc": tuple(f"m{i}" for i in range(6)),
        "channel": ("web", "pos", "atm"),
    },
)


def random_number(rng, *, positive=False) -> float:
    if rng.random() < 0.4:
        v = float(rng.integers(0 if positive else -20, 50))
        if positive and v <= 0:
            v = 1.0
        return v
    v = float(np.round(rng.uniform(0.1 if positive else -100.0, 100.0), 4))
    if positive and v <= 0:
        v = 0.5
    return v


def random_window(rng) -> A.Window:
    r = rng.random()
    if r < 0.5:
        return A.Window()
    if r < 0.75:
        return A.Window("last_days", float(np.round(rng.uniform(0.5, 120.0), 2)))
    return A.Window("last_events", int(rng.integers(1, 60)))


def random_predicate(rng, schema: EventSchema, depth: int = 0) -> A.PredicateNode:
    if depth < 2 and rng.random() < 0.35:
        kind = rng.random()
        if kind < 0.4:
            return A.And(random_predicate(rng, schema, depth + 1), random_predicate(rng, schema, depth + 1))
        if kind < 0.8:
            return A.Or(random_predicate(rng, schema, depth + 1), random_predicate(rng, schema, depth + 1))
        return A.Not(random_predicate(rng, schema, depth + 1))
    if rng.random() < 0.5:
        field = str(rng.choice(schema.categorical_fields()))
        vocab = list(schema.vocabulary(field)) + ["zz-unseen"]
        if rng.random() < 0.4:
            k = int(rng.integers(1, min(4, len(vocab))))
            values = tuple(str(v) for v in rng.choice(vocab, size=k, replace=False))
            return A.InSet(field, values)
        op = str(rng.choice(["==", "!="]))
        return A.Cmp(field, op, str(rng.choice(vocab)))
    field = str(rng.choice(schema.numeric_fields()))
    op = str(rng.choice(["==", "!=", "<", "<=", ">", ">="]))
    return A.Cmp(field, op, random_number(rng))


def random_agg(rng, schema: EventSchema) -> A.Agg:
    name = str(rng.choice(list(A.AGGREGATORS)))
    spec = A.AGGREGATORS[name]
    field = None
    if spec["field"] == NUMERIC:
        field = str(rng.choice(schema.numeric_fields()))
    elif spec["field"] == CATEGORICAL:
        field = str(rng.choice(schema.categorical_fields()))
    predicate = random_predicate(rng, schema) if rng.random() < 0.4 else None
    kwargs = {}
    if "halflife_days" in spec["params"]:
        kwargs["halflife_days"] = float(np.round(rng.uniform(0.5, 60.0), 2))
    if "lag" in spec["params"]:
        kwargs["lag"] = int(rng.integers(1, 5))
    return A.Agg(name, field=field, predicate=predicate, window=random_window(rng), **kwargs)


def random_expr(rng, schema: EventSchema = TEST_SCHEMA, depth: int = 0) -> A.ExprNode:
    r = rng.random()
    if depth >= 3 or r < 0.55:
        if r < 0.08:
            return A.Const(random_number(rng))
        return random_agg(rng, schema)
    if r < 0.75:
        op = str(rng.choice(list(A.ARITH_OPS)))
        return A.Arith(op, random_expr(rng, schema, depth + 1), random_expr(rng, schema, depth + 1))
    fn = str(rng.choice(list(A.UNARY_FUNCTIONS)))
    child = random_expr(rng, schema, depth + 1)
    if fn == "clip":
        lo = random_number(rng)
        hi = lo + abs(random_number(rng))
        return A.Unary(fn, child, lo, hi)
    return A.Unary(fn, child)


def random_sequence(rng, schema: EventSchema = TEST_SCHEMA, seq_id: str = "s") -> EventSequence:
    """Random sequence with missing cells, timestamp ties, and tiny lengths."""
    n = int(rng.choice([0, 1, 2, 3, 5, 8, 20, 60], p=[0.05, 0.1, 0.1, 0.1, 0.15, 0.2, 0.2, 0.1]))
    if n == 0:
        ts = np.empty(0)
    else:
        gaps = rng.exponential(0.8 * 86400.0, size=n)
        gaps[rng.random(n) < 0.15] = 0.0  # timestamp ties
        ts = np.cumsum(gaps) + rng.uniform(0, 1e6)
    cat = {}
    for name in schema.categorical_fields():
        size = len(schema.vocabulary(name))
        ids = rng.integers(0, size, size=n).astype(np.uint32)
        ids[rng.random(n) < 0.1] = MISSING_CATEGORY
        cat[name] = ids
    num = {}
    for name in schema.numeric_fields():
        vals = np.round(rng.normal(50.0, 40.0, size=n), 6)
        vals[rng.random(n) < 0.12] = np.nan
        num[name] = vals
    return EventSequence(seq_id, ts, cat, num)
