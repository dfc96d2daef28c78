"""
Pretty-printer producing text that parses back to the same tree.
"""
from relchain.relational.sql.ast import BinaryOp, Call, ColumnRef, Insert, Literal, LiteralKind, Select, Update


def format_literal(literal):
    if literal.kind == LiteralKind.STRING:
        return "'" + literal.value.replace("'", "''") + "'"
    if literal.kind == LiteralKind.DECIMAL:
        return format_decimal(literal.value)
    return str(literal.value)


def format_decimal(scaled):
    sign = "-" if scaled < 0 else ""
    whole, cents = divmod(abs(scaled), 100)
    return f"{sign}{whole}.{cents:02d}"


def format_expr(expr):
    if isinstance(expr, ColumnRef):
        return expr.name
    if isinstance(expr, Literal):
        return format_literal(expr)
    if isinstance(expr, BinaryOp):
        # the grammar is left-associative, so a nested right operand cannot be printed flat
        if isinstance(expr.right, BinaryOp):
            raise ValueError("right operand of a binary operator must be a term")
        return f"{format_expr(expr.left)} {expr.op} {format_expr(expr.right)}"
    raise TypeError(f"not an expression: {expr!r}")


def _where(conditions):
    if not conditions:
        return ""
    return " WHERE " + " AND ".join(f"{c.column} = {format_literal(c.value)}" for c in conditions)


def format_statement(stmt):
    if isinstance(stmt, Update):
        sets = ", ".join(f"{a.column} = {format_expr(a.expr)}" for a in stmt.assignments)
        return f"UPDATE {stmt.table} SET {sets}{_where(stmt.where)}"
    if isinstance(stmt, Select):
        columns = "*" if stmt.columns is None else ", ".join(stmt.columns)
        return f"SELECT {columns} FROM {stmt.table}{_where(stmt.where)}"
    if isinstance(stmt, Insert):
        return f"INSERT INTO {stmt.table} VALUES ({', '.join(format_literal(v) for v in stmt.values)})"
    if isinstance(stmt, Call):
        return f"CALL {stmt.name}({', '.join(format_literal(a) for a in stmt.args)})"
    raise TypeError(f"not a statement: {stmt!r}")


def format_script(statements):
    return "; ".join(format_statement(s) for s in statements)
