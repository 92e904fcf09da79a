from .ast import (
    AGGREGATORS,
    ARITH_OPS,
    SECONDS_PER_DAY,
    UNARY_FUNCTIONS,
    Agg,
    And,
    Arith,
    Cmp,
    Const,
    DslValueError,
    ExprNode,
    FeatureExpr,
    InSet,
    Not,
    Or,
    PredicateNode,
    Unary,
    Window,
    referenced_fields,
    walk,
)
from .categories import ACTIVITY, ALL_CATEGORIES, AMOUNT, CATEGORIES, TIME, tag_category
from .errors import (
    CODE_LEXICAL,
    CODE_SYNTAX,
    CODE_TYPE,
    CODE_UNKNOWN_AGGREGATOR,
    CODE_UNKNOWN_FIELD,
    DslError,
)
from .evaluate import (
    CompiledFeature,
    FeatureMatrix,
    compile_feature,
    evaluate_batch,
    evaluate_feature,
)
from .parser import parse
from .printer import canonical_print
from .typecheck import type_check

__all__ = [
    "ACTIVITY",
    "AGGREGATORS",
    "ALL_CATEGORIES",
    "AMOUNT",
    "ARITH_OPS",
    "CATEGORIES",
    "CODE_LEXICAL",
    "CODE_SYNTAX",
    "CODE_TYPE",
    "CODE_UNKNOWN_AGGREGATOR",
    "CODE_UNKNOWN_FIELD",
    "SECONDS_PER_DAY",
    "TIME",
    "UNARY_FUNCTIONS",
    "Agg",
    "And",
    "Arith",
    "Cmp",
    "CompiledFeature",
    "Const",
    "DslError",
    "DslValueError",
    "ExprNode",
    "FeatureExpr",
    "FeatureMatrix",
    "InSet",
    "Not",
    "Or",
    "PredicateNode",
    "Unary",
    "Window",
    "canonical_print",
    "compile_feature",
    "evaluate_batch",
    "evaluate_feature",
    "parse",
    "referenced_fields",
    "tag_category",
    "type_check",
    "walk",
]
