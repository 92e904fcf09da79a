"""Schema-aware validation of parsed feature expressions."""

from __future__ import annotations

import difflib

from ..dataset.schema import CATEGORICAL, NUMERIC, EventSchema
from .ast import (
    AGGREGATORS,
    Agg,
    Arith,
    Cmp,
    Const,
    ExprNode,
    InSet,
    Not,
    PredicateNode,
    Unary,
)
from .errors import CODE_TYPE, CODE_UNKNOWN_FIELD, DslError


def _resolve_field(name: str, schema: EventSchema):
    for f in schema.fields:
        if f.name == name:
            return f
    candidates = schema.field_names
    nearest = difflib.get_close_matches(name, candidates, n=1, cutoff=0.5)
    hint = f"; did you mean {nearest[0]!r}?" if nearest else ""
    raise DslError(CODE_UNKNOWN_FIELD, f"unknown field {name!r}{hint}")


def _check_predicate(pred: PredicateNode, schema: EventSchema) -> None:
    if isinstance(pred, Cmp):
        f = _resolve_field(pred.field, schema)
        if isinstance(pred.value, str):
            if f.kind != CATEGORICAL:
                raise DslError(
                    CODE_TYPE,
                    f"field {pred.field!r} is numeric but compared to a string",
                )
        else:
            if f.kind != NUMERIC:
                raise DslError(
                    CODE_TYPE,
                    f"field {pred.field!r} is categorical but compared to a number",
                )
    elif isinstance(pred, InSet):
        f = _resolve_field(pred.field, schema)
        if f.kind != CATEGORICAL:
            raise DslError(CODE_TYPE, f"in-set predicate needs a categorical field, got {pred.field!r}")
    elif isinstance(pred, Not):
        _check_predicate(pred.child, schema)
    else:
        _check_predicate(pred.lhs, schema)
        _check_predicate(pred.rhs, schema)


def type_check(expr: ExprNode, schema: EventSchema) -> None:
    """Raise DslError (type / unknown_field) if the expression does not fit the schema."""
    if isinstance(expr, Const):
        return
    if isinstance(expr, Unary):
        type_check(expr.child, schema)
        return
    if isinstance(expr, Arith):
        type_check(expr.lhs, schema)
        type_check(expr.rhs, schema)
        return
    if isinstance(expr, Agg):
        want = AGGREGATORS[expr.name]["field"]
        if expr.field is not None:
            f = _resolve_field(expr.field, schema)
            if want == NUMERIC and f.kind != NUMERIC:
                raise DslError(
                    CODE_TYPE,
                    f"{expr.name} needs a numeric field, but {expr.field!r} is categorical",
                )
            if want == CATEGORICAL and f.kind != CATEGORICAL:
                raise DslError(
                    CODE_TYPE,
                    f"{expr.name} needs a categorical field, but {expr.field!r} is numeric",
                )
        if expr.predicate is not None:
            _check_predicate(expr.predicate, schema)
        return
    raise DslError(CODE_TYPE, f"unknown expression node {type(expr).__name__}")
