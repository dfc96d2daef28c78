"""
Base class for workloads
"""
from pathlib import Path

from relchain.relational.executor import Engine
from relchain.relational.procedures import ProcedureRegistry
from relchain.relational.schema import load_schema
from relchain.relational.storage import Database

SCHEMAS_PATH = Path(__file__).parent / "schemas"


class Workload(object):
    """
    A workload knows its schema, its genesis population, its stored
    procedures and how to generate statement i of a run.
    """
    name = None
    schema_file = None

    def __init__(self, config):
        self.config = config

    def schemas(self):
        return load_schema(SCHEMAS_PATH / self.schema_file)

    def population(self):
        """ {table name: iterable of rows} of the genesis state """
        raise NotImplementedError("Please implement your workload method")

    def procedures(self):
        return ()

    def next_statement(self, i):
        """ WlStatement number i of the run """
        raise NotImplementedError("Please implement your workload method")

    def query_statement(self, i):
        """ read-only statement number i, for runs that go through query """
        raise NotImplementedError(f"workload {self.name} has no read-only statements")

    def sequence(self, n, start=0):
        return [self.next_statement(i) for i in range(start, start + n)]

    def make_database(self):
        db = Database(self.schemas())
        for table, rows in self.population().items():
            db.load_rows(table, rows)
        return db

    def make_engine(self, db=None):
        """Fresh engine over the genesis state (or over a clone of db)."""
        db = db.clone() if db is not None else self.make_database()
        return Engine(db, ProcedureRegistry(self.procedures()))
