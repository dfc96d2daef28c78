from relchain.relational.executor import Engine, execute_script, execute_statement
from relchain.relational.procedures import ProcedureContext, ProcedureRegistry, StoredProcedure
from relchain.relational.result import QueryResult
from relchain.relational.schema import Column, ColumnType, TableSchema, load_schema, parse_schema
from relchain.relational.storage import Database, state_hash
