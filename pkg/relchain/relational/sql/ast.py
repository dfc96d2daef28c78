"""
Parsed statement trees. All nodes are immutable and compare by value.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union


class LiteralKind(str, Enum):
    INT = "int"
    DECIMAL = "decimal"  # value is scaled by 100
    STRING = "string"


@dataclass(frozen=True)
class Literal:
    kind: LiteralKind
    value: Union[int, str]


@dataclass(frozen=True)
class ColumnRef:
    name: str


@dataclass(frozen=True)
class BinaryOp:
    op: str  # "+" or "-"
    left: "Expr"
    right: "Expr"


Expr = Union[Literal, ColumnRef, BinaryOp]


@dataclass(frozen=True)
class Assignment:
    column: str
    expr: Expr


@dataclass(frozen=True)
class Condition:
    column: str
    value: Literal


@dataclass(frozen=True)
class Update:
    table: str
    assignments: Tuple[Assignment, ...]
    where: Tuple[Condition, ...] = ()


@dataclass(frozen=True)
class Select:
    table: str
    # None selects every column
    columns: Optional[Tuple[str, ...]]
    where: Tuple[Condition, ...] = ()


@dataclass(frozen=True)
class Insert:
    table: str
    values: Tuple[Literal, ...]


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple[Literal, ...]


SqlStatement = Union[Update, Select, Insert, Call]


def int_lit(value):
    return Literal(LiteralKind.INT, value)


def dec_lit(scaled):
    return Literal(LiteralKind.DECIMAL, scaled)


def str_lit(value):
    return Literal(LiteralKind.STRING, value)
