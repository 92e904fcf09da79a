import numpy as np
import pytest

from eafd.fdsl import (
    Agg,
    Arith,
    CODE_LEXICAL,
    CODE_SYNTAX,
    CODE_TYPE,
    CODE_UNKNOWN_AGGREGATOR,
    CODE_UNKNOWN_FIELD,
    DslError,
    Window,
    canonical_print,
    parse,
    type_check,
)
from random_dsl import TEST_SCHEMA, random_expr


def test_count_with_window():
    e = parse("count(window=last_days(30))")
    assert e == Agg("count", window=Window("last_days", 30.0))


def test_hhi_positional_field_defaults_to_all_window():
    e = parse("hhi(mcc)")
    assert e == Agg("hhi", field="mcc")
    assert e.window.kind == "all"


def test_ratio_with_predicate_on_lhs():
    e = parse('mean(amount where mcc == "5411")/mean(amount)')
    assert isinstance(e, Arith) and e.op == "/"
    assert e.lhs.predicate is not None
    assert e.rhs.predicate is None


def test_whitespace_normalization():
    text = "count( window = last_days( 30 ) )"
    assert canonical_print(parse(text)) == "count(window=last_days(30))"


def test_print_is_fixed_point():
    for text in [
        "count()",
        'sum(amount where mcc in {"m1", "m3"} or amount > 9.5)',
        "log1p(mean(balance))/(1+hhi(mcc))",
        "ewma(amount, halflife_days=7.5, window=last_events(12))",
    ]:
        once = canonical_print(parse(text))
        assert canonical_print(parse(once)) == once


@pytest.mark.parametrize(
    "text,code",
    [
        ('count(where mcc == "a', CODE_LEXICAL),
        ("mean(amount))", CODE_SYNTAX),
        ("count(window=last_days(-3))", CODE_TYPE),
        ("autocorr(amount, lag=0)", CODE_TYPE),
        ("hhi(amount) + 1e", CODE_LEXICAL),
        ("countt(mcc)", CODE_UNKNOWN_AGGREGATOR),
        ("median()", CODE_TYPE),
        ("mean(amount, lag=2)", CODE_TYPE),
        ("count(frobnicate=2)", CODE_SYNTAX),
    ],
)
def test_error_codes(text, code):
    with pytest.raises(DslError) as info:
        parse(text)
    assert info.value.code == code
    assert info.value.offset is not None


def test_syntax_error_reports_offset_and_expected():
    with pytest.raises(DslError) as info:
        parse("count(window=)")
    err = info.value
    assert err.code == CODE_SYNTAX
    assert err.offset == 13
    assert err.expected


def test_unknown_field_suggests_nearest():
    with pytest.raises(DslError) as info:
        parse("entropy(mccc)", TEST_SCHEMA)
    err = info.value
    assert err.code == CODE_UNKNOWN_FIELD
    assert "mcc" in err.message


def test_type_errors_against_schema():
    with pytest.raises(DslError) as info:
        parse("mean(mcc)", TEST_SCHEMA)
    assert info.value.code == CODE_TYPE
    with pytest.raises(DslError) as info:
        parse("entropy(amount)", TEST_SCHEMA)
    assert info.value.code == CODE_TYPE
    with pytest.raises(DslError) as info:
        parse('count(where amount == "cash")', TEST_SCHEMA)
    assert info.value.code == CODE_TYPE
    # valid expressions pass
    type_check(parse('count(where mcc != "m0" and amount <= 4)'), TEST_SCHEMA)


def test_roundtrip_random_asts_small():
    rng = np.random.default_rng(7)
    for _ in range(500):
        expr = random_expr(rng)
        text = canonical_print(expr)
        back = parse(text)
        assert back == expr, text
        assert canonical_print(back) == text


def test_negative_constants_roundtrip():
    e = parse("mean(amount)-(-2.5)")
    assert canonical_print(e) == "mean(amount)-(-2.5)"
    assert parse(canonical_print(e)) == e


def test_subtraction_grouping_preserved():
    left = parse("(1-2)-3")
    right = parse("1-(2-3)")
    assert left != right
    assert parse(canonical_print(left)) == left
    assert parse(canonical_print(right)) == right
    assert canonical_print(left) == "1-2-3"
    assert canonical_print(right) == "1-(2-3)"
