from relchain.relational.sql.parser import parse_sql
from relchain.relational.sql.printer import format_script, format_statement
