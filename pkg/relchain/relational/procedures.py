"""
Stored procedure registry and the context procedures run against.
"""
from dataclasses import dataclass
from typing import Callable, Tuple

from relchain.errors import DuplicateProcedure, ExecutionError, NotReadOnly
from relchain.relational.schema import ColumnType, check_value


@dataclass(frozen=True)
class StoredProcedure:
    name: str
    params: Tuple[ColumnType, ...]
    impl: Callable
    read_only: bool = False

    @property
    def arity(self):
        return len(self.params)


class ProcedureRegistry:

    def __init__(self, procedures=()):
        self._procedures = {}
        for procedure in procedures:
            self.register_procedure(procedure)

    def register_procedure(self, procedure):
        if procedure.name in self._procedures:
            raise DuplicateProcedure(f"procedure {procedure.name} is already registered")
        self._procedures[procedure.name] = procedure

    def lookup(self, name):
        procedure = self._procedures.get(name)
        if procedure is None:
            raise ExecutionError(f"unknown procedure {name}")
        return procedure

    def __contains__(self, name):
        return name in self._procedures

    def __iter__(self):
        return iter(self._procedures.values())


class ProcedureContext:
    """
    Row access for procedure bodies. Rows are handed out as dicts keyed by
    column name. A snapshot context reads the last committed state and
    refuses writes.
    """

    def __init__(self, db, block_time, snapshot=False):
        self._db = db
        self.block_time = block_time
        self.snapshot = snapshot

    def get(self, table, *key):
        schema = self._db.table(table).schema
        row = self._db.get_committed(table, key) if self.snapshot else self._db.get(table, key)
        if row is None:
            return None
        return dict(zip(schema.column_names, row))

    def require(self, table, *key):
        row = self.get(table, *key)
        if row is None:
            raise ExecutionError(f"no row {key} in {table}")
        return row

    def insert(self, table, **values):
        schema = self._writable(table)
        try:
            row = tuple(values[name] for name in schema.column_names)
        except KeyError as e:
            raise ExecutionError(f"missing value for {table}.{e.args[0]}") from None
        if len(values) != len(schema.columns):
            raise ExecutionError(f"unknown columns for {table}: {sorted(set(values) - set(schema.column_names))}")
        self._check(schema, row)
        self._db.insert(table, row)

    def update(self, table, key, **changes):
        schema = self._writable(table)
        key = tuple(key)
        current = self._db.get(table, key)
        if current is None:
            raise ExecutionError(f"no row {key} in {table}")
        row = list(current)
        for name, value in changes.items():
            index = schema.column_index(name)
            if index is None:
                raise ExecutionError(f"unknown column {table}.{name}")
            if index in schema.pk_positions:
                raise ExecutionError(f"cannot change primary key column {table}.{name}")
            row[index] = value
        row = tuple(row)
        self._check(schema, row)
        self._db.update(table, key, row)

    def _writable(self, table):
        if self.snapshot:
            raise NotReadOnly(f"write to {table} from a read-only context")
        return self._db.table(table).schema

    @staticmethod
    def _check(schema, row):
        try:
            for column, value in zip(schema.columns, row):
                check_value(column, value)
        except ValueError as e:
            raise ExecutionError(str(e)) from None
