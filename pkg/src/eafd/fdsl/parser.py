"""Tokenizer and recursive-descent parser for the feature language.

Grammar (EBNF, also published in the README):

    expr        = term , { ("+" | "-") , term } ;
    term        = factor , { ("*" | "/") , factor } ;
    factor      = number | "-" number | "(" expr ")"
                | unary_call | agg_call ;
    unary_call  = ("log1p" | "abs" | "sqrt") "(" expr ")"
                | "clip" "(" expr "," number "," number ")" ;
    agg_call    = name "(" [ arg_head ] { "," named_param } ")" ;
    arg_head    = field [ where_clause ] | where_clause | named_param ;
    where_clause= "where" pred_or ;
    named_param = name "=" (number | window) ;
    window      = "all" | "last_days" "(" number ")"
                | "last_events" "(" integer ")" ;
    pred_or     = pred_and , { "or" pred_and } ;
    pred_and    = pred_not , { "and" pred_not } ;
    pred_not    = "not" pred_not | "(" pred_or ")" | comparison ;
    comparison  = field cmp_op literal | field "in" "{" string {"," string} "}" ;
    cmp_op      = "==" | "!=" | "<" | "<=" | ">" | ">=" ;
    literal     = number | string ;

Parsing is schema-free; field names are resolved by the type checker.
"""

from __future__ import annotations

from .ast import (
    AGGREGATORS,
    UNARY_FUNCTIONS,
    Agg,
    And,
    Arith,
    Cmp,
    Const,
    DslValueError,
    ExprNode,
    InSet,
    Not,
    Or,
    PredicateNode,
    Unary,
    Window,
)
from .errors import DslError, CODE_LEXICAL, CODE_SYNTAX

_KEYWORDS = {"where", "and", "or", "not", "in", "all"}
_PUNCT = {"(", ")", "{", "}", ",", "=", "+", "-", "*", "/", "==", "!=", "<", "<=", ">", ">="}


class _Token:
    __slots__ = ("kind", "text", "value", "offset")

    def __init__(self, kind: str, text: str, offset: int, value=None):
        self.kind = kind  # name | number | string | punct | eof
        self.text = text
        self.value = value
        self.offset = offset

    def __repr__(self):  # pragma: no cover
        return f"_Token({self.kind}, {self.text!r}@{self.offset})"


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(_Token("name", src[i:j], i))
            i = j
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k >= n or not src[k].isdigit():
                    raise DslError(CODE_LEXICAL, f"malformed number {src[i:k]!r}", offset=i)
                j = k
                while j < n and src[j].isdigit():
                    j += 1
            text = src[i:j]
            try:
                value = float(text)
            except ValueError:
                raise DslError(CODE_LEXICAL, f"malformed number {text!r}", offset=i) from None
            tokens.append(_Token("number", text, i, value))
            i = j
            continue
        if c == '"':
            j = i + 1
            out = []
            while j < n and src[j] != '"':
                if src[j] == "\\":
                    if j + 1 >= n:
                        raise DslError(CODE_LEXICAL, "unterminated escape", offset=j)
                    esc = src[j + 1]
                    mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc)
                    if mapped is None:
                        raise DslError(CODE_LEXICAL, f"unknown escape \\{esc}", offset=j)
                    out.append(mapped)
                    j += 2
                else:
                    out.append(src[j])
                    j += 1
            if j >= n:
                raise DslError(CODE_LEXICAL, "unterminated string literal", offset=i)
            tokens.append(_Token("string", src[i : j + 1], i, "".join(out)))
            i = j + 1
            continue
        two = src[i : i + 2]
        if two in _PUNCT:
            tokens.append(_Token("punct", two, i))
            i += 2
            continue
        if c in _PUNCT:
            tokens.append(_Token("punct", c, i))
            i += 1
            continue
        raise DslError(CODE_LEXICAL, f"unexpected character {c!r}", offset=i)
    tokens.append(_Token("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.cur
        self.pos += 1
        return tok

    def fail(self, message: str, expected: tuple[str, ...] = ()):
        raise DslError(CODE_SYNTAX, message, offset=self.cur.offset, expected=expected)

    def expect_punct(self, text: str) -> _Token:
        if self.cur.kind == "punct" and self.cur.text == text:
            return self.advance()
        self.fail(f"found {self.cur.text or 'end of input'!r}", expected=(text,))

    def at_punct(self, *texts: str) -> bool:
        return self.cur.kind == "punct" and self.cur.text in texts

    # expression grammar -----------------------------------------------------

    def parse(self) -> ExprNode:
        expr = self.expr()
        if self.cur.kind != "eof":
            self.fail(f"unexpected trailing input {self.cur.text!r}", expected=("end of input",))
        return expr

    def expr(self) -> ExprNode:
        node = self.term()
        while self.at_punct("+", "-"):
            op = self.advance().text
            node = Arith(op, node, self.term())
        return node

    def term(self) -> ExprNode:
        node = self.factor()
        while self.at_punct("*", "/"):
            op = self.advance().text
            node = Arith(op, node, self.factor())
        return node

    def factor(self) -> ExprNode:
        tok = self.cur
        if tok.kind == "number":
            self.advance()
            return Const(tok.value)
        if self.at_punct("-"):
            self.advance()
            if self.cur.kind != "number":
                self.fail("'-' must be followed by a number literal", expected=("number",))
            return Const(-self.advance().value)
        if self.at_punct("("):
            self.advance()
            node = self.expr()
            self.expect_punct(")")
            return node
        if tok.kind == "name":
            if tok.text in UNARY_FUNCTIONS:
                return self.unary_call()
            return self.agg_call()
        self.fail(
            f"found {tok.text or 'end of input'!r}",
            expected=("number", "(", "function", "aggregator"),
        )

    def unary_call(self) -> ExprNode:
        name = self.advance().text
        self.expect_punct("(")
        child = self.expr()
        if name == "clip":
            self.expect_punct(",")
            lo = self.signed_number()
            self.expect_punct(",")
            hi = self.signed_number()
            self.expect_punct(")")
            return self.build(lambda: Unary(name, child, lo, hi))
        self.expect_punct(")")
        return self.build(lambda: Unary(name, child))

    def signed_number(self) -> float:
        neg = False
        if self.at_punct("-"):
            self.advance()
            neg = True
        if self.cur.kind != "number":
            self.fail("expected a number", expected=("number",))
        v = self.advance().value
        return -v if neg else v

    def agg_call(self) -> ExprNode:
        tok = self.advance()
        name = tok.text
        if name not in AGGREGATORS:
            from .errors import CODE_UNKNOWN_AGGREGATOR

            nearest = _nearest(name, list(AGGREGATORS) + list(UNARY_FUNCTIONS))
            hint = f"; did you mean {nearest!r}?" if nearest else ""
            raise DslError(
                CODE_UNKNOWN_AGGREGATOR,
                f"unknown aggregator {name!r}{hint}",
                offset=tok.offset,
            )
        self.expect_punct("(")
        field = None
        predicate = None
        params: dict[str, object] = {}

        def parse_named_param():
            key_tok = self.advance()
            key = key_tok.text
            if key not in ("window", "halflife_days", "lag"):
                raise DslError(
                    CODE_SYNTAX,
                    f"unknown parameter {key!r} for {name}",
                    offset=key_tok.offset,
                    expected=("window", "halflife_days", "lag"),
                )
            if key in params:
                raise DslError(CODE_SYNTAX, f"duplicate parameter {key!r}", offset=key_tok.offset)
            self.expect_punct("=")
            if key == "window":
                params["window"] = self.window_value()
            else:
                if self.cur.kind != "number":
                    self.fail(f"parameter {key}= expects a number", expected=("number",))
                params[key] = self.advance().value

        if not self.at_punct(")"):
            # first slot: field, where-clause, or named param
            if self.cur.kind == "name" and self.cur.text == "where":
                self.advance()
                predicate = self.pred_or()
            elif (
                self.cur.kind == "name"
                and self.tokens[self.pos + 1].kind == "punct"
                and self.tokens[self.pos + 1].text == "="
            ):
                parse_named_param()
            elif self.cur.kind == "name":
                field = self.advance().text
                if self.cur.kind == "name" and self.cur.text == "where":
                    self.advance()
                    predicate = self.pred_or()
            else:
                self.fail(
                    f"found {self.cur.text or 'end of input'!r}",
                    expected=("field", "where", "parameter", ")"),
                )
            while self.at_punct(","):
                self.advance()
                if self.cur.kind != "name":
                    self.fail("expected parameter name", expected=("window", "halflife_days", "lag"))
                parse_named_param()
        self.expect_punct(")")

        window = params.pop("window", Window())
        return self.build(
            lambda: Agg(
                name,
                field=field,
                predicate=predicate,
                window=window,
                halflife_days=params.get("halflife_days"),
                lag=params.get("lag"),
            ),
            offset=tok.offset,
        )

    def window_value(self) -> Window:
        tok = self.cur
        if tok.kind != "name":
            self.fail("expected a window", expected=("all", "last_days", "last_events"))
        kind = self.advance().text
        if kind == "all":
            return Window()
        if kind in ("last_days", "last_events"):
            self.expect_punct("(")
            k = self.signed_number()
            self.expect_punct(")")
            return self.build(lambda: Window(kind, k), offset=tok.offset)
        self.fail(f"unknown window {kind!r}", expected=("all", "last_days", "last_events"))

    # predicate grammar -------------------------------------------------------

    def pred_or(self) -> PredicateNode:
        node = self.pred_and()
        while self.cur.kind == "name" and self.cur.text == "or":
            self.advance()
            node = Or(node, self.pred_and())
        return node

    def pred_and(self) -> PredicateNode:
        node = self.pred_not()
        while self.cur.kind == "name" and self.cur.text == "and":
            self.advance()
            node = And(node, self.pred_not())
        return node

    def pred_not(self) -> PredicateNode:
        if self.cur.kind == "name" and self.cur.text == "not":
            self.advance()
            return Not(self.pred_not())
        if self.at_punct("("):
            self.advance()
            node = self.pred_or()
            self.expect_punct(")")
            return node
        return self.comparison()

    def comparison(self) -> PredicateNode:
        if self.cur.kind != "name" or self.cur.text in _KEYWORDS:
            self.fail(
                f"found {self.cur.text or 'end of input'!r}",
                expected=("field", "(", "not"),
            )
        field = self.advance().text
        if self.cur.kind == "name" and self.cur.text == "in":
            self.advance()
            self.expect_punct("{")
            values = [self.string_literal()]
            while self.at_punct(","):
                self.advance()
                values.append(self.string_literal())
            self.expect_punct("}")
            return self.build(lambda: InSet(field, tuple(values)))
        if not self.at_punct("==", "!=", "<", "<=", ">", ">="):
            self.fail(
                f"found {self.cur.text or 'end of input'!r}",
                expected=("==", "!=", "<", "<=", ">", ">=", "in"),
            )
        op = self.advance().text
        tok = self.cur
        if tok.kind == "string":
            self.advance()
            return self.build(lambda: Cmp(field, op, tok.value), offset=tok.offset)
        value = self.signed_number()
        return self.build(lambda: Cmp(field, op, value), offset=tok.offset)

    def string_literal(self) -> str:
        if self.cur.kind != "string":
            self.fail("expected a string literal", expected=("string",))
        return self.advance().value

    def build(self, ctor, offset: int | None = None):
        """Run a node constructor, converting domain violations to type errors."""
        try:
            return ctor()
        except DslValueError as exc:
            from .errors import CODE_TYPE

            raise DslError(CODE_TYPE, str(exc), offset=offset if offset is not None else self.cur.offset) from exc


def _nearest(name: str, options: list[str]) -> str | None:
    import difflib

    matches = difflib.get_close_matches(name, options, n=1, cutoff=0.6)
    return matches[0] if matches else None


def parse(text: str, schema=None) -> ExprNode:
    """Parse source text to an AST; optionally type-check against a schema.

    Raises DslError with a distinct code for lexical, syntax, type,
    unknown-field, and unknown-aggregator failures.
    """
    if not isinstance(text, str):
        raise DslError(CODE_LEXICAL, "source must be a string", offset=0)
    expr = _Parser(text).parse()
    if schema is not None:
        from .typecheck import type_check

        type_check(expr, schema)
    return expr
