"""
Statement execution against a Database.

Statement level problems (unknown table or column, type mismatch, duplicate
key, unknown procedure, wrong arity) never raise out of `execute_statement`;
they become a failed ExecStatus and the block lifecycle decides what to do.
"""
import logging

from relchain.errors import ExecutionError, NotReadOnly, ParseError
from relchain.ledger.types import ExecStatus
from relchain.relational.procedures import ProcedureContext, ProcedureRegistry
from relchain.relational.result import QueryResult, affected_rows_payload
from relchain.relational.schema import ColumnType, check_value
from relchain.relational.sql.ast import BinaryOp, Call, ColumnRef, Insert, Literal, LiteralKind, Select, Update
from relchain.relational.sql.parser import parse_sql
from relchain.relational.storage import state_hash

logger = logging.getLogger(__name__)


def coerce_literal(literal, column_type, what):
    """Stored value of a literal for a column (or parameter) of the given type."""
    if column_type == ColumnType.STRING:
        if literal.kind != LiteralKind.STRING:
            raise ExecutionError(f"type mismatch: {what} expects a string")
        return literal.value
    if literal.kind == LiteralKind.STRING:
        raise ExecutionError(f"type mismatch: {what} expects a number")
    if column_type == ColumnType.INT64:
        if literal.kind == LiteralKind.DECIMAL:
            raise ExecutionError(f"type mismatch: {what} expects an integer")
        return literal.value
    return literal.value * 100 if literal.kind == LiteralKind.INT else literal.value


def _column(schema, name):
    index = schema.column_index(name)
    if index is None:
        raise ExecutionError(f"unknown column {schema.name}.{name}")
    return index, schema.columns[index]


def eval_expr(expr, schema, row, target_type):
    """Evaluate expr against the pre-statement row for a column of target_type."""
    if isinstance(expr, Literal):
        return coerce_literal(expr, target_type, "assignment")
    if isinstance(expr, ColumnRef):
        index, column = _column(schema, expr.name)
        value = row[index]
        if target_type == ColumnType.STRING or column.type == ColumnType.STRING:
            if target_type != column.type:
                raise ExecutionError(f"type mismatch: cannot assign {column.type.value} to {target_type.value}")
            return value
        if target_type == ColumnType.INT64 and column.type == ColumnType.DECIMAL:
            raise ExecutionError(f"type mismatch: cannot assign decimal {column.name} to int64")
        if target_type == ColumnType.DECIMAL and column.type == ColumnType.INT64:
            return value * 100
        return value
    if isinstance(expr, BinaryOp):
        if target_type == ColumnType.STRING:
            raise ExecutionError("type mismatch: arithmetic on a string column")
        left = eval_expr(expr.left, schema, row, target_type)
        right = eval_expr(expr.right, schema, row, target_type)
        return left + right if expr.op == "+" else left - right
    raise ExecutionError(f"unsupported expression {expr!r}")


class Executor:
    """
    Runs parsed statements. With snapshot=True all reads see the last
    committed state and writes are refused.
    """

    def __init__(self, db, procedures=None, block_time=0, snapshot=False):
        self.db = db
        self.procedures = procedures if procedures is not None else ProcedureRegistry()
        self.block_time = block_time
        self.snapshot = snapshot

    def _get(self, table, key):
        return self.db.get_committed(table, key) if self.snapshot else self.db.get(table, key)

    def _matching(self, schema, where):
        """Rows matching a conjunction of column = literal, in primary key order."""
        wanted = {}
        for condition in where:
            index, column = _column(schema, condition.column)
            value = coerce_literal(condition.value, column.type, f"{schema.name}.{column.name}")
            if wanted.get(index, value) != value:
                return []
            wanted[index] = value
        pk = schema.pk_positions
        if all(i in wanted for i in pk):
            row = self._get(schema.name, tuple(wanted[i] for i in pk))
            rows = [] if row is None else [row]
        else:
            rows = self.db.scan(schema.name, committed=self.snapshot)
        return [r for r in rows if all(r[i] == v for i, v in wanted.items())]

    def run(self, stmt):
        """Execute one statement; returns (payload bytes, QueryResult or None)."""
        if isinstance(stmt, Update):
            return affected_rows_payload(self._update(stmt)), None
        if isinstance(stmt, Insert):
            self._insert(stmt)
            return affected_rows_payload(1), None
        if isinstance(stmt, Select):
            result = self._select(stmt)
            return result.encode(), result
        if isinstance(stmt, Call):
            result = self._call(stmt)
            return (result.encode() if result is not None else b""), result
        raise ExecutionError(f"unsupported statement {stmt!r}")

    def _update(self, stmt):
        if self.snapshot:
            raise NotReadOnly("UPDATE is not read-only")
        schema = self.db.table(stmt.table).schema
        targets = []
        for assignment in stmt.assignments:
            index, column = _column(schema, assignment.column)
            if index in schema.pk_positions:
                raise ExecutionError(f"cannot assign primary key column {schema.name}.{column.name}")
            targets.append((index, column, assignment.expr))
        rows = self._matching(schema, stmt.where)
        for row in rows:
            new_row = list(row)
            for index, column, expr in targets:
                value = eval_expr(expr, schema, row, column.type)
                try:
                    check_value(column, value)
                except ValueError as e:
                    raise ExecutionError(str(e)) from None
                new_row[index] = value
            self.db.update(schema.name, schema.key_of(row), tuple(new_row))
        return len(rows)

    def _insert(self, stmt):
        if self.snapshot:
            raise NotReadOnly("INSERT is not read-only")
        schema = self.db.table(stmt.table).schema
        if len(stmt.values) != len(schema.columns):
            raise ExecutionError(f"{schema.name} has {len(schema.columns)} columns, got {len(stmt.values)} values")
        row = tuple(coerce_literal(lit, col.type, f"{schema.name}.{col.name}")
                    for lit, col in zip(stmt.values, schema.columns))
        try:
            for column, value in zip(schema.columns, row):
                check_value(column, value)
        except ValueError as e:
            raise ExecutionError(str(e)) from None
        self.db.insert(schema.name, row)

    def _select(self, stmt):
        schema = self.db.table(stmt.table).schema
        if stmt.columns is None:
            positions = list(range(len(schema.columns)))
        else:
            positions = [_column(schema, name)[0] for name in stmt.columns]
        rows = self._matching(schema, stmt.where)
        return QueryResult(tuple(schema.columns[i] for i in positions),
                           tuple(tuple(row[i] for i in positions) for row in rows))

    def _call(self, stmt):
        procedure = self.procedures.lookup(stmt.name)
        if self.snapshot and not procedure.read_only:
            raise NotReadOnly(f"procedure {procedure.name} is not read-only")
        if len(stmt.args) != procedure.arity:
            raise ExecutionError(f"{procedure.name} takes {procedure.arity} arguments, got {len(stmt.args)}")
        args = [coerce_literal(arg, param, f"argument {i + 1} of {procedure.name}")
                for i, (arg, param) in enumerate(zip(stmt.args, procedure.params))]
        ctx = ProcedureContext(self.db, self.block_time, snapshot=self.snapshot)
        return procedure.impl(ctx, *args)


def execute_statement(db, stmt, procedures=None, block_time=0):
    """Execute one parsed statement inside the open db-transaction."""
    try:
        with db.lock:
            payload, _ = Executor(db, procedures, block_time).run(stmt)
    except (ExecutionError, NotReadOnly) as e:
        return ExecStatus.failure(str(e))
    return ExecStatus.success(payload)


def execute_script(db, text, procedures=None, block_time=0):
    """
    Parse and run a workload statement. The script fails at its first failing
    statement; the payload of the last statement is returned on success.
    """
    try:
        statements = parse_sql(text)
    except ParseError as e:
        return ExecStatus.failure(str(e))
    status = ExecStatus.success()
    for stmt in statements:
        status = execute_statement(db, stmt, procedures, block_time)
        if not status.ok:
            break
    if db.transaction is not None:
        db.transaction.statements_applied += 1
    return status


class Engine:
    """A database plus its procedure registry: the standalone relational backend."""

    def __init__(self, db, procedures=None):
        self.db = db
        self.procedures = procedures if procedures is not None else ProcedureRegistry()
        self._block_time = 0

    def register_procedure(self, procedure):
        self.procedures.register_procedure(procedure)

    def begin(self, block_time):
        self._block_time = block_time
        return self.db.begin(block_time)

    def execute(self, text):
        return execute_script(self.db, text, self.procedures, self._block_time)

    def commit_block(self):
        return self.db.commit()

    def rollback_block(self):
        return self.db.rollback()

    def state_hash(self):
        return self.db.committed_hash()

    def full_state_hash(self):
        return state_hash(self.db)

    def snapshot_query(self, text):
        """Answer a single SELECT or read-only CALL from the last committed state."""
        statements = parse_sql(text)
        if len(statements) != 1:
            raise NotReadOnly("query takes exactly one statement")
        stmt = statements[0]
        if isinstance(stmt, Call):
            if not self.procedures.lookup(stmt.name).read_only:
                raise NotReadOnly(f"procedure {stmt.name} is not read-only")
        elif not isinstance(stmt, Select):
            raise NotReadOnly(f"{type(stmt).__name__.upper()} is not read-only")
        with self.db.lock:
            _, result = Executor(self.db, self.procedures, self._block_time, snapshot=True).run(stmt)
        if result is None:
            result = QueryResult((), ())
        return result
