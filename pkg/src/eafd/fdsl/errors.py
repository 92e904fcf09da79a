"""Diagnostics for the feature language.

Every failure carries a machine-readable code, a byte offset into the
source text, and (for syntax errors) the token set that would have been
accepted — enough context to paste verbatim into a repair prompt.
"""

from __future__ import annotations

CODE_LEXICAL = "lexical"
CODE_SYNTAX = "syntax"
CODE_TYPE = "type"
CODE_UNKNOWN_FIELD = "unknown_field"
CODE_UNKNOWN_AGGREGATOR = "unknown_aggregator"


class DslError(ValueError):
    def __init__(
        self,
        code: str,
        message: str,
        offset: int | None = None,
        expected: tuple[str, ...] = (),
    ):
        self.code = code
        self.message = message
        self.offset = offset
        self.expected = tuple(expected)
        loc = f" at byte {offset}" if offset is not None else ""
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"[{code}]{loc}: {message}{exp}")

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "offset": self.offset,
            "expected": list(self.expected),
        }
