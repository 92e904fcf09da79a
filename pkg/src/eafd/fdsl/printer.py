"""Canonical text form of feature expressions.

The canonical form is a fixed point of parse-then-print: whitespace is
normalized, named parameters appear in a fixed order with ``window=all``
omitted, set literals are sorted, and numbers use the shortest decimal
that round-trips (integral values print without a decimal point).
"""

from __future__ import annotations

from .ast import (
    WINDOW_ALL,
    WINDOW_LAST_DAYS,
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
    Window,
)

_ARITH_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_number(v: float) -> str:
    v = float(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _fmt_string(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def _print_window(w: Window) -> str | None:
    if w.kind == WINDOW_ALL:
        return None
    if w.kind == WINDOW_LAST_DAYS:
        return f"window=last_days({_fmt_number(w.k)})"
    return f"window=last_events({_fmt_number(w.k)})"


def _print_pred(p: PredicateNode, parent_prec: int = 0) -> str:
    # precedence: or=1, and=2, not=3, atom=4
    if isinstance(p, Or):
        text = f"{_print_pred(p.lhs, 1)} or {_print_pred(p.rhs, 2)}"
        prec = 1
    elif isinstance(p, And):
        text = f"{_print_pred(p.lhs, 2)} and {_print_pred(p.rhs, 3)}"
        prec = 2
    elif isinstance(p, Not):
        text = f"not {_print_pred(p.child, 3)}"
        prec = 3
    elif isinstance(p, Cmp):
        lit = _fmt_string(p.value) if isinstance(p.value, str) else _fmt_number(p.value)
        return f"{p.field} {p.op} {lit}"
    elif isinstance(p, InSet):
        inner = ", ".join(_fmt_string(v) for v in p.values)
        return f"{p.field} in {{{inner}}}"
    else:  # pragma: no cover
        raise TypeError(f"unknown predicate node {type(p)}")
    if prec < parent_prec:
        return f"({text})"
    return text


def canonical_print(expr: ExprNode, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, Const):
        if expr.value < 0 or str(expr.value) == "-0.0":
            return f"(-{_fmt_number(-expr.value)})"
        return _fmt_number(expr.value)
    if isinstance(expr, Unary):
        if expr.fn == "clip":
            lo = _fmt_number(expr.lo) if expr.lo >= 0 else f"-{_fmt_number(-expr.lo)}"
            hi = _fmt_number(expr.hi) if expr.hi >= 0 else f"-{_fmt_number(-expr.hi)}"
            return f"clip({canonical_print(expr.child)}, {lo}, {hi})"
        return f"{expr.fn}({canonical_print(expr.child)})"
    if isinstance(expr, Agg):
        parts: list[str] = []
        head = ""
        if expr.field is not None:
            head = expr.field
        if expr.predicate is not None:
            head = (head + " " if head else "") + "where " + _print_pred(expr.predicate)
        if head:
            parts.append(head)
        if expr.halflife_days is not None:
            parts.append(f"halflife_days={_fmt_number(expr.halflife_days)}")
        if expr.lag is not None:
            parts.append(f"lag={_fmt_number(expr.lag)}")
        w = _print_window(expr.window)
        if w is not None:
            parts.append(w)
        return f"{expr.name}({', '.join(parts)})"
    if isinstance(expr, Arith):
        prec = _ARITH_PREC[expr.op]
        lhs = canonical_print(expr.lhs, prec, False)
        rhs = canonical_print(expr.rhs, prec, True)
        text = f"{lhs}{expr.op}{rhs}"
        # parenthesize when a lower-precedence child would re-associate,
        # or when the right child of - or / has equal precedence
        if prec < parent_prec or (prec == parent_prec and right_side):
            return f"({text})"
        return text
    raise TypeError(f"unknown expression node {type(expr)}")
