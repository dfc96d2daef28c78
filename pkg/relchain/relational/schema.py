"""
Table schemas and the schema bootstrap text format:

    table accounts
      custid int64 pk
      name string
      checking decimal

Blank lines and lines starting with '#' are ignored.
"""
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Tuple

from relchain.errors import ConfigError

DECIMAL_LIMIT = 10 ** 12  # decimal(12,2) stored scaled by 100
INT64_MIN, INT64_MAX = -2 ** 63, 2 ** 63 - 1


class ColumnType(str, Enum):
    INT64 = "int64"
    DECIMAL = "decimal"
    STRING = "string"


@dataclass(frozen=True)
class Column:
    name: str
    type: ColumnType


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: Tuple[Column, ...]
    primary_key: Tuple[str, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ConfigError(f"table {self.name}: duplicate column names")
        if not self.primary_key:
            raise ConfigError(f"table {self.name}: a primary key is required")
        for key in self.primary_key:
            if key not in names:
                raise ConfigError(f"table {self.name}: unknown primary key column {key}")
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(names)})
        object.__setattr__(self, "_pk_index", tuple(names.index(k) for k in self.primary_key))

    def column_index(self, name):
        """Position of a column, or None when the table has no such column."""
        return self._index.get(name)

    @property
    def pk_positions(self):
        return self._pk_index

    def key_of(self, row):
        return tuple(row[i] for i in self._pk_index)

    @property
    def column_names(self):
        return tuple(c.name for c in self.columns)


def parse_schema(text, source="<schema>"):
    """Parse the bootstrap text format into an ordered tuple of TableSchema."""
    tables = []
    name, columns, pk = None, [], []

    def close():
        if name is not None:
            tables.append(TableSchema(name, tuple(columns), tuple(pk)))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        words = line.split()
        if not raw[0].isspace():
            if len(words) != 2 or words[0] != "table":
                raise ConfigError(f"{source}:{lineno}: expected 'table <name>'")
            close()
            name, columns, pk = words[1], [], []
            continue
        if name is None:
            raise ConfigError(f"{source}:{lineno}: column outside of a table")
        if len(words) not in (2, 3) or (len(words) == 3 and words[2] != "pk"):
            raise ConfigError(f"{source}:{lineno}: expected '<column> <type> [pk]'")
        try:
            column_type = ColumnType(words[1])
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: unknown type {words[1]!r}") from None
        columns.append(Column(words[0], column_type))
        if len(words) == 3:
            pk.append(words[0])
    close()
    return tuple(tables)


def load_schema(path):
    path = Path(path)
    return parse_schema(path.read_text(), source=str(path))


def check_value(column, value):
    """Raise ValueError unless value is a legal stored value for column."""
    if column.type == ColumnType.STRING:
        if not isinstance(value, str):
            raise ValueError(f"column {column.name} expects a string")
        return
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"column {column.name} expects a number")
    if column.type == ColumnType.DECIMAL:
        if not -DECIMAL_LIMIT < value < DECIMAL_LIMIT:
            raise ValueError(f"decimal overflow in column {column.name}")
    elif not INT64_MIN <= value <= INT64_MAX:
        raise ValueError(f"int64 overflow in column {column.name}")
