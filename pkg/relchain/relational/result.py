"""
Query results and their canonical encoding (the ExecStatus result payload).
"""
from dataclasses import dataclass
from decimal import Decimal
from typing import Tuple

from relchain.errors import DecodeError
from relchain.ledger.codec import Decoder, Encoder
from relchain.relational.schema import Column, ColumnType

_TYPE_CODES = {ColumnType.INT64: 0, ColumnType.DECIMAL: 1, ColumnType.STRING: 2}
_CODE_TYPES = {code: t for t, code in _TYPE_CODES.items()}


@dataclass(frozen=True)
class QueryResult:
    columns: Tuple[Column, ...]
    rows: Tuple[tuple, ...]

    @property
    def column_names(self):
        return tuple(c.name for c in self.columns)

    def records(self):
        """Rows as dicts, decimals as Decimal."""
        out = []
        for row in self.rows:
            record = {}
            for column, value in zip(self.columns, row):
                record[column.name] = Decimal(value).scaleb(-2) if column.type == ColumnType.DECIMAL else value
            out.append(record)
        return out

    def encode(self):
        enc = Encoder()
        enc.list(self.columns, lambda e, c: e.str(c.name).u8(_TYPE_CODES[c.type]))
        enc.list(self.rows, self._write_row)
        return enc.getvalue()

    def _write_row(self, enc, row):
        for column, value in zip(self.columns, row):
            if column.type == ColumnType.STRING:
                enc.str(value)
            else:
                enc.i64(value)

    @classmethod
    def decode(cls, data):
        dec = Decoder(data)
        columns = tuple(dec.list(lambda d: Column(d.str(), _column_type(d.u8()))))

        def read_row(d):
            return tuple(d.str() if c.type == ColumnType.STRING else d.i64() for c in columns)

        rows = tuple(dec.list(read_row))
        dec.finish()
        return cls(columns, rows)


def affected_rows_payload(count):
    return Encoder().u64(count).getvalue()


def _column_type(code):
    if code not in _CODE_TYPES:
        raise DecodeError(f"unknown column type code {code}")
    return _CODE_TYPES[code]
