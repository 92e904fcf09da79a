"""Deterministic category tagging of feature expressions.

Tags partition features into four groups used by interpretability and
erasure reports: amount (touches a numeric field anywhere), categories
(touches a categorical field but no numeric one), time (built purely
from temporal aggregators or restricted windows), activity (plain event
volume).
"""

from __future__ import annotations

from ..dataset.schema import NUMERIC, EventSchema
from .ast import Agg, ExprNode, WINDOW_ALL, predicate_fields, referenced_fields, walk

AMOUNT = "amount"
CATEGORIES = "categories"
TIME = "time"
ACTIVITY = "activity"

ALL_CATEGORIES = (AMOUNT, CATEGORIES, TIME, ACTIVITY)

_TEMPORAL_AGGS = frozenset(
    {"span_days", "recency_days", "mean_interevent_days", "std_interevent_days", "burstiness"}
)


def tag_category(expr: ExprNode, schema: EventSchema) -> str:
    touched_numeric = False
    touched_categorical = False
    temporal = False
    for node in walk(expr):
        if not isinstance(node, Agg):
            continue
        for name in set(
            ([] if node.field is None else [node.field]) + list(predicate_fields(node.predicate))
        ):
            if schema.field(name).kind == NUMERIC:
                touched_numeric = True
            else:
                touched_categorical = True
        if node.name in _TEMPORAL_AGGS:
            temporal = True
        if node.window.kind != WINDOW_ALL:
            temporal = True
    if touched_numeric:
        return AMOUNT
    if touched_categorical:
        return CATEGORIES
    if temporal:
        return TIME
    return ACTIVITY
