import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from relchain.errors import ParseError
from relchain.relational.sql.ast import (Assignment, BinaryOp, Call, ColumnRef, Condition, Insert, Select, Update,
                                         dec_lit, int_lit, str_lit)
from relchain.relational.sql.parser import INT64_MAX, INT64_MIN, KEYWORDS, parse_sql
from relchain.relational.sql.printer import format_decimal, format_script, format_statement

idents = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True).filter(lambda s: s.upper() not in KEYWORDS)
literals = st.one_of(
    st.builds(int_lit, st.integers(min_value=INT64_MIN, max_value=INT64_MAX)),
    st.builds(dec_lit, st.integers(min_value=-10 ** 14, max_value=10 ** 14)),
    st.builds(str_lit, st.text(max_size=12)),
)
terms = st.one_of(literals, st.builds(ColumnRef, idents))


@st.composite
def exprs(draw):
    expr = draw(terms)
    for _ in range(draw(st.integers(min_value=0, max_value=3))):
        expr = BinaryOp(draw(st.sampled_from("+-")), expr, draw(terms))
    return expr


conditions = st.lists(st.builds(Condition, idents, literals), max_size=3).map(tuple)
sql_statements = st.one_of(
    st.builds(Update, idents, st.lists(st.builds(Assignment, idents, exprs()), min_size=1, max_size=3).map(tuple),
              conditions),
    st.builds(Select, idents, st.one_of(st.none(), st.lists(idents, min_size=1, max_size=4).map(tuple)),
              conditions),
    st.builds(Insert, idents, st.lists(literals, min_size=1, max_size=4).map(tuple)),
    st.builds(Call, idents, st.lists(literals, max_size=4).map(tuple)),
)


@settings(max_examples=10_000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(sql_statements, min_size=1, max_size=3).map(tuple))
def test_print_then_parse_is_identity(statements):
    assert parse_sql(format_script(statements)) == statements


def test_smallbank_statement():
    statements = parse_sql("UPDATE accounts SET checking = checking - 25 WHERE custid = 7; "
                           "update accounts set checking = checking + 25 where custid = 9;")
    assert len(statements) == 2
    first = statements[0]
    assert first == Update("accounts", (Assignment("checking", BinaryOp("-", ColumnRef("checking"), int_lit(25))),),
                           (Condition("custid", int_lit(7)),))
    assert format_statement(first) == "UPDATE accounts SET checking = checking - 25 WHERE custid = 7"


def test_literals():
    (call,) = parse_sql("CALL Payment(1, -2, 3.5, -0.05, 'it''s')")
    assert call.args == (int_lit(1), int_lit(-2), dec_lit(350), dec_lit(-5), str_lit("it's"))
    assert format_decimal(-5) == "-0.05"
    assert format_decimal(123456) == "1234.56"


def test_identifiers_are_case_sensitive():
    (select,) = parse_sql("select Name, name FROM Accounts")
    assert select == Select("Accounts", ("Name", "name"))


@pytest.mark.parametrize("text, offset", [
    ("UPDATE accounts SET", 19),
    ("SELECT * FROM t WHERE", 21),
    ("DELETE FROM t", 0),
    ("SELECT a FROM t x", 16),
    ("CALL p(1, 2", 11),
    ("SELECT * FROM t WHERE a = 'open", 26),
])
def test_parse_error_offsets(text, offset):
    with pytest.raises(ParseError) as info:
        parse_sql(text)
    assert info.value.offset == offset


def test_parse_error_offset_counts_bytes():
    text = "SELECT * FROM t WHERE a = 'é' AND"
    with pytest.raises(ParseError) as info:
        parse_sql(text)
    assert info.value.offset == len(text.encode("utf-8"))
    assert info.value.offset == len(text) + 1


def test_number_limits():
    with pytest.raises(ParseError):
        parse_sql("SELECT * FROM t WHERE a = 1.005")
    with pytest.raises(ParseError):
        parse_sql(f"SELECT * FROM t WHERE a = {INT64_MAX + 1}")
    (select,) = parse_sql(f"SELECT * FROM t WHERE a = {INT64_MIN}")
    assert select.where[0].value == int_lit(INT64_MIN)
