"""
Recursive-descent parser for the SQL subset (grammar in docs/sql-subset.md).

Keywords are case-insensitive, identifiers are case-sensitive. Error offsets
are byte offsets into the UTF-8 encoded input.
"""
import re
from dataclasses import dataclass
from functools import lru_cache

from relchain.errors import ParseError
from relchain.relational.sql.ast import (Assignment, BinaryOp, Call, ColumnRef, Condition, Insert, Literal,
                                         LiteralKind, Select, Update)

KEYWORDS = frozenset({"SELECT", "FROM", "WHERE", "AND", "UPDATE", "SET", "INSERT", "INTO", "VALUES", "CALL"})
INT64_MIN, INT64_MAX = -2 ** 63, 2 ** 63 - 1

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>[0-9]+(?:\.[0-9]+)?)
  | (?P<string>'(?:[^']|'')*')
  | (?P<punct>[,()=+\-*;])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # keyword, ident, number, string, punct, eof
    value: str
    offset: int  # character offset


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            expected = "closing quote" if text[pos] == "'" else "token"
            raise ParseError(_byte_offset(text, pos), expected, text[pos:pos + 10])
        kind = match.lastgroup
        value = match.group()
        if kind == "word":
            kind = "keyword" if value.upper() in KEYWORDS else "ident"
            if kind == "keyword":
                value = value.upper()
        if kind != "ws":
            tokens.append(Token(kind, value, pos))
        pos = match.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


def _byte_offset(text, char_offset):
    return len(text[:char_offset].encode("utf-8"))


class Parser:

    def __init__(self, text):
        self._text = text
        self._tokens = tokenize(text)
        self._pos = 0

    # token helpers

    def _peek(self):
        return self._tokens[self._pos]

    def _advance(self):
        token = self._tokens[self._pos]
        if token.kind != "eof":
            self._pos += 1
        return token

    def _error(self, expected):
        token = self._peek()
        raise ParseError(_byte_offset(self._text, token.offset), expected, token.value or "end of input")

    def _check(self, kind, value=None):
        token = self._peek()
        return token.kind == kind and (value is None or token.value == value)

    def _accept(self, kind, value=None):
        if self._check(kind, value):
            return self._advance()
        return None

    def _expect(self, kind, value=None, expected=None):
        token = self._accept(kind, value)
        if token is None:
            self._error(expected or value or kind)
        return token

    def _keyword(self, word):
        return self._expect("keyword", word)

    def _ident(self, what="identifier"):
        return self._expect("ident", expected=what).value

    # grammar

    def parse_script(self):
        statements = [self._statement()]
        while self._accept("punct", ";"):
            if self._check("eof"):
                break
            statements.append(self._statement())
        if not self._check("eof"):
            self._error("';' or end of input")
        return tuple(statements)

    def _statement(self):
        token = self._peek()
        if token.kind == "keyword":
            if token.value == "UPDATE":
                return self._update()
            if token.value == "SELECT":
                return self._select()
            if token.value == "INSERT":
                return self._insert()
            if token.value == "CALL":
                return self._call()
        self._error("UPDATE, SELECT, INSERT or CALL")

    def _update(self):
        self._keyword("UPDATE")
        table = self._ident("table name")
        self._keyword("SET")
        assignments = [self._assignment()]
        while self._accept("punct", ","):
            assignments.append(self._assignment())
        return Update(table, tuple(assignments), self._where())

    def _assignment(self):
        column = self._ident("column name")
        self._expect("punct", "=")
        return Assignment(column, self._expr())

    def _expr(self):
        expr = self._term()
        while self._check("punct", "+") or self._check("punct", "-"):
            op = self._advance().value
            expr = BinaryOp(op, expr, self._term())
        return expr

    def _term(self):
        if self._check("ident"):
            return ColumnRef(self._advance().value)
        return self._literal(expected="column or literal")

    def _select(self):
        self._keyword("SELECT")
        if self._accept("punct", "*"):
            columns = None
        else:
            names = [self._ident("column name or '*'")]
            while self._accept("punct", ","):
                names.append(self._ident("column name"))
            columns = tuple(names)
        self._keyword("FROM")
        table = self._ident("table name")
        return Select(table, columns, self._where())

    def _insert(self):
        self._keyword("INSERT")
        self._keyword("INTO")
        table = self._ident("table name")
        self._keyword("VALUES")
        return Insert(table, self._literal_list(allow_empty=False))

    def _call(self):
        self._keyword("CALL")
        name = self._ident("procedure name")
        return Call(name, self._literal_list(allow_empty=True))

    def _literal_list(self, allow_empty):
        self._expect("punct", "(")
        values = []
        if not (allow_empty and self._check("punct", ")")):
            values.append(self._literal())
            while self._accept("punct", ","):
                values.append(self._literal())
        self._expect("punct", ")", expected="',' or ')'")
        return tuple(values)

    def _where(self):
        if not self._accept("keyword", "WHERE"):
            return ()
        conditions = [self._condition()]
        while self._accept("keyword", "AND"):
            conditions.append(self._condition())
        return tuple(conditions)

    def _condition(self):
        column = self._ident("column name")
        self._expect("punct", "=")
        return Condition(column, self._literal())

    def _literal(self, expected="literal"):
        token = self._peek()
        if token.kind == "string":
            self._advance()
            return Literal(LiteralKind.STRING, token.value[1:-1].replace("''", "'"))
        negative = False
        if token.kind == "punct" and token.value == "-":
            self._advance()
            negative = True
            token = self._peek()
        if token.kind != "number":
            self._error("number" if negative else expected)
        self._advance()
        return _number(self._text, token, negative)


def _number(text, token, negative):
    whole, _, frac = token.value.partition(".")
    sign = -1 if negative else 1
    if not frac:
        value = sign * int(whole)
        if not INT64_MIN <= value <= INT64_MAX:
            raise ParseError(_byte_offset(text, token.offset), "integer within int64 range", token.value)
        return Literal(LiteralKind.INT, value)
    if len(frac) > 2:
        raise ParseError(_byte_offset(text, token.offset), "at most two fractional digits", token.value)
    scaled = int(whole) * 100 + int(frac.ljust(2, "0"))
    return Literal(LiteralKind.DECIMAL, sign * scaled)


@lru_cache(maxsize=65536)
def parse_sql(text):
    """Parse a ';'-separated script into a tuple of statements."""
    return Parser(text).parse_script()
