"""
In-memory row store with one undo-logged db-transaction per block.

Rows are tuples in column order keyed by their primary key tuple. The state
hash is the SHA-256 of the canonical serialization of every table in schema
order, rows sorted by primary key. Tables cache the encoding of each row and
their serialized form, so a commit only re-encodes the rows it touched.
"""
import hashlib
import logging
import threading

from relchain.errors import ExecutionError
from relchain.ledger.codec import Encoder
from relchain.relational.schema import ColumnType

logger = logging.getLogger(__name__)


class _Inserted:
    def __repr__(self):
        return "INSERTED"


INSERTED = _Inserted()


def encode_row(schema, row):
    enc = Encoder()
    for column, value in zip(schema.columns, row):
        if column.type == ColumnType.STRING:
            enc.str(value)
        else:
            enc.i64(value)
    return enc.getvalue()


def table_prefix(name, row_count):
    return Encoder().str(name).u64(row_count).getvalue()


class Table:

    def __init__(self, schema):
        self.schema = schema
        self.rows = {}
        self._encoded = {}
        self._serialized = None

    def set_row(self, key, row):
        """Replace (row) or delete (None) the row under key."""
        if row is None:
            self.rows.pop(key, None)
            self._encoded.pop(key, None)
        else:
            self.rows[key] = row
            self._encoded[key] = encode_row(self.schema, row)
        self._serialized = None

    def serialized(self):
        if self._serialized is None:
            body = b"".join(self._encoded[k] for k in sorted(self._encoded))
            self._serialized = table_prefix(self.schema.name, len(self.rows)) + body
        return self._serialized

    def copy_from(self, other):
        self.rows = dict(other.rows)
        self._encoded = dict(other._encoded)
        self._serialized = other._serialized


class DbTransaction:
    """Undo log of one block. `first_touch` keeps the committed image of every touched row."""

    def __init__(self, block_time):
        self.block_time = block_time
        self.undo = []
        self.first_touch = {}
        self.statements_applied = 0

    def record(self, table_name, key, before):
        self.undo.append((table_name, key, before))
        self.first_touch.setdefault((table_name, key), before)


class Database:

    def __init__(self, schemas):
        self._tables = {schema.name: Table(schema) for schema in schemas}
        self.lock = threading.RLock()
        self._tx = None
        self._committed_hash = None

    @property
    def schemas(self):
        return tuple(t.schema for t in self._tables.values())

    @property
    def in_transaction(self):
        return self._tx is not None

    @property
    def transaction(self):
        return self._tx

    def table(self, name):
        table = self._tables.get(name)
        if table is None:
            raise ExecutionError(f"unknown table {name}")
        return table

    def has_table(self, name):
        return name in self._tables

    def row_count(self, name):
        return len(self.table(name).rows)

    # reads

    def get(self, table_name, key):
        """Current row, including changes of the open db-transaction."""
        return self.table(table_name).rows.get(key)

    def get_committed(self, table_name, key):
        """Row as of the last commit."""
        table = self.table(table_name)
        tx = self._tx
        if tx is not None and (table_name, key) in tx.first_touch:
            before = tx.first_touch[(table_name, key)]
            return None if before is INSERTED else before
        return table.rows.get(key)

    def scan(self, table_name, committed=False):
        """All rows ordered by primary key."""
        table = self.table(table_name)
        if not committed or self._tx is None:
            return [table.rows[k] for k in sorted(table.rows)]
        keys = set(table.rows)
        keys.update(k for (name, k) in self._tx.first_touch if name == table_name)
        rows = (self.get_committed(table_name, k) for k in sorted(keys))
        return [r for r in rows if r is not None]

    # writes

    def load_rows(self, table_name, rows):
        """Bulk load outside of any db-transaction (genesis population)."""
        if self._tx is not None:
            raise RuntimeError("cannot bulk load while a db-transaction is open")
        table = self.table(table_name)
        for row in rows:
            key = table.schema.key_of(row)
            if key in table.rows:
                raise ExecutionError(f"duplicate key {key} in {table_name}")
            table.set_row(key, tuple(row))
        self._committed_hash = None

    def insert(self, table_name, row):
        table = self.table(table_name)
        key = table.schema.key_of(row)
        if key in table.rows:
            raise ExecutionError(f"duplicate key {key} in {table_name}")
        self._require_tx().record(table_name, key, INSERTED)
        table.set_row(key, tuple(row))

    def update(self, table_name, key, row):
        table = self.table(table_name)
        before = table.rows.get(key)
        if before is None:
            raise ExecutionError(f"no row {key} in {table_name}")
        if before == row:
            return
        self._require_tx().record(table_name, key, before)
        table.set_row(key, tuple(row))

    def _require_tx(self):
        if self._tx is None:
            raise RuntimeError("no open db-transaction")
        return self._tx

    # block transaction

    def begin(self, block_time):
        with self.lock:
            if self._tx is not None:
                raise RuntimeError("a db-transaction is already open")
            self.committed_hash()
            self._tx = DbTransaction(block_time)
            return self._tx

    def commit(self):
        with self.lock:
            tx = self._require_tx()
            self._tx = None
            self._committed_hash = self.state_hash()
            logger.debug("db-commit: %d undo records dropped", len(tx.undo))
            return self._committed_hash

    def rollback(self):
        with self.lock:
            tx = self._require_tx()
            for table_name, key, before in reversed(tx.undo):
                self._tables[table_name].set_row(key, None if before is INSERTED else before)
            self._tx = None
            logger.debug("db-rollback: %d undo records replayed", len(tx.undo))
            return self.committed_hash()

    # hashing

    def state_hash(self):
        """Digest of the current state, including uncommitted changes."""
        digest = hashlib.sha256()
        for table in self._tables.values():
            digest.update(table.serialized())
        return digest.digest()

    def committed_hash(self):
        """Digest of the state as of the last commit."""
        with self.lock:
            if self._committed_hash is None:
                if self._tx is not None:
                    raise RuntimeError("committed hash unknown while a db-transaction is open")
                self._committed_hash = self.state_hash()
            return self._committed_hash

    def clone(self):
        """Independent copy of the committed state."""
        with self.lock:
            if self._tx is not None:
                raise RuntimeError("cannot clone while a db-transaction is open")
            copy = Database(self.schemas)
            for name, table in self._tables.items():
                copy._tables[name].copy_from(table)
            copy._committed_hash = self._committed_hash
            return copy


def state_hash(db):
    """Serialize every table from a fresh scan and digest it, ignoring the cached encodings."""
    digest = hashlib.sha256()
    for schema in db.schemas:
        rows = db.scan(schema.name)
        digest.update(table_prefix(schema.name, len(rows)))
        for row in rows:
            digest.update(encode_row(schema, row))
    return digest.digest()
