"""
TPC-C at a configurable scale: the nine standard tables, the NewOrder and
Payment write transactions and the read-only OrderStatus, all shipped as
CALL statements against deterministic stored procedures.

Deviations from the standard, all deterministic by construction:
  - money is decimal cents, tax and discount rates are integer basis points
  - strings are lowercase hex tokens
  - dates are the block_time of the executing block (0 at genesis)
  - NURand uses C = 0 and there is no 1% rolled-back NewOrder
  - the ten S_DIST_xx columns collapse to one s_dist column
"""
from pydantic import BaseModel, Field, model_validator

from relchain.errors import ExecutionError
from relchain.ledger.types import WlStatement
from relchain.relational.procedures import StoredProcedure
from relchain.relational.result import QueryResult
from relchain.relational.schema import Column, ColumnType
from relchain.relational.sql.printer import format_decimal
from relchain.workloads.base import Workload
from relchain.workloads.rng import population_rng, stream

INT, DEC, STR = ColumnType.INT64, ColumnType.DECIMAL, ColumnType.STRING

NEW_ORDER = "NewOrder"
PAYMENT = "Payment"
ORDER_STATUS = "OrderStatus"

CLIENT_ID = "tpcc"
NURAND_C = 0
MAX_DATA = 500
BASIS_POINTS = 10_000
LAST_NAME_SYLLABLES = ("BAR", "OUGHT", "ABLE", "PRI", "PRES", "ESE", "ANTI", "CALLY", "ATION", "EING")


class TpccConfig(BaseModel):
    warehouses: int = Field(10, ge=1)
    districts: int = Field(10, ge=1, le=10)
    customers: int = Field(3000, ge=1)
    items: int = Field(100_000, ge=1)
    # relative weights of the generated write mix
    new_order_weight: int = Field(1, ge=0)
    payment_weight: int = Field(1, ge=0)
    order_status_weight: int = Field(0, ge=0)
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_mix(self):
        if self.new_order_weight + self.payment_weight + self.order_status_weight == 0:
            raise ValueError("the transaction mix needs at least one positive weight")
        return self

    @property
    def new_order_threshold(self):
        """Initial orders from this id on are still undelivered (the last 30%)."""
        return self.customers - (self.customers * 3) // 10 + 1


# generator helpers


def nurand(rng, a, x, y):
    return ((rng.uniform(0, a) | rng.uniform(x, y)) + NURAND_C) % (y - x + 1) + x


def random_text(rng, lo, hi):
    return rng.token(rng.uniform(lo, hi))


def with_original(rng, text):
    """10% of item and stock data strings carry the ORIGINAL marker."""
    if rng.uniform(1, 10) != 1:
        return text
    at = rng.uniform(0, len(text) - 8)
    return text[:at] + "ORIGINAL" + text[at + 8:]


def zipcode(rng):
    return f"{rng.uniform(0, 9999):04d}11111"


def last_name(number):
    return "".join(LAST_NAME_SYLLABLES[int(digit)] for digit in f"{number:03d}")


def other_warehouse(rng, w_id, warehouses):
    if warehouses == 1:
        return w_id
    other = rng.uniform(1, warehouses - 1)
    return other + 1 if other >= w_id else other


# population


def tpcc_rows(config):
    """
    Genesis rows of all nine tables. Every customer places exactly one
    initial order; orders are assigned to customers by a seeded permutation.
    """
    rng = population_rng(config.seed)
    tables = {name: [] for name in ("warehouse", "district", "customer", "history", "new_order",
                                    "orders", "order_line", "item", "stock")}
    for i_id in range(1, config.items + 1):
        tables["item"].append((i_id, rng.uniform(1, 10_000), random_text(rng, 14, 24),
                               rng.uniform(100, 10_000), with_original(rng, random_text(rng, 26, 50))))

    for w_id in range(1, config.warehouses + 1):
        tables["warehouse"].append((w_id, random_text(rng, 6, 10), random_text(rng, 10, 20),
                                    random_text(rng, 10, 20), rng.token(2), zipcode(rng),
                                    rng.uniform(0, 2000), 30_000_000))
        for i_id in range(1, config.items + 1):
            tables["stock"].append((w_id, i_id, rng.uniform(10, 100), rng.token(24), 0, 0, 0,
                                    with_original(rng, random_text(rng, 26, 50))))
        for d_id in range(1, config.districts + 1):
            _populate_district(rng, config, tables, w_id, d_id)
    return tables


def _populate_district(rng, config, tables, w_id, d_id):
    n = config.customers
    tables["district"].append((w_id, d_id, random_text(rng, 6, 10), random_text(rng, 10, 20),
                               random_text(rng, 10, 20), rng.token(2), zipcode(rng),
                               rng.uniform(0, 2000), 3_000_000, n + 1, n + 1))
    order_of = {}
    permutation = rng.shuffle(list(range(1, n + 1)))
    for o_id, c_id in enumerate(permutation, start=1):
        order_of[c_id] = o_id
    for c_id in range(1, n + 1):
        name = last_name(c_id - 1 if c_id <= 1000 else nurand(rng, 255, 0, 999))
        credit = "BC" if rng.uniform(1, 10) == 1 else "GC"
        tables["customer"].append((w_id, d_id, c_id, random_text(rng, 8, 16), "OE", name,
                                   random_text(rng, 10, 20), random_text(rng, 10, 20), rng.token(2),
                                   zipcode(rng), f"{rng.uniform(0, 10 ** 16 - 1):016d}", 0, credit,
                                   5_000_000, rng.uniform(0, 5000), -1000, 1000, 1, 0,
                                   random_text(rng, 300, 500), order_of[c_id]))
        tables["history"].append((w_id, d_id, c_id, c_id, d_id, w_id, 0, 1000, random_text(rng, 12, 24)))

    for o_id, c_id in enumerate(permutation, start=1):
        delivered = o_id < config.new_order_threshold
        ol_cnt = rng.uniform(5, 15)
        tables["orders"].append((w_id, d_id, o_id, c_id, 0, rng.uniform(1, 10) if delivered else 0, ol_cnt, 1))
        for number in range(1, ol_cnt + 1):
            amount = 0 if delivered else rng.uniform(1, 999_999)
            tables["order_line"].append((w_id, d_id, o_id, number, rng.uniform(1, config.items), w_id,
                                         0, 5, amount, rng.token(24)))
        if not delivered:
            tables["new_order"].append((w_id, d_id, o_id))


# stored procedures


def parse_order_lines(lines):
    """'item:supply_w:qty,...' into a list of int triples."""
    parsed = []
    for part in lines.split(","):
        fields = part.split(":")
        if len(fields) != 3 or not all(f.isdigit() for f in fields):
            raise ExecutionError(f"malformed order line {part!r}")
        parsed.append(tuple(int(f) for f in fields))
    if not 1 <= len(parsed) <= 15:
        raise ExecutionError(f"an order has 1 to 15 lines, got {len(parsed)}")
    return parsed


def format_order_lines(lines):
    return ",".join(f"{i}:{s}:{q}" for i, s, q in lines)


def new_order(ctx, w_id, d_id, c_id, lines):
    warehouse = ctx.require("warehouse", w_id)
    district = ctx.require("district", w_id, d_id)
    customer = ctx.require("customer", w_id, d_id, c_id)
    order_lines = parse_order_lines(lines)

    o_id = district["d_next_o_id"]
    ctx.update("district", (w_id, d_id), d_next_o_id=o_id + 1)
    all_local = int(all(supply == w_id for _, supply, _ in order_lines))
    ctx.insert("orders", o_w_id=w_id, o_d_id=d_id, o_id=o_id, o_c_id=c_id, o_entry_d=ctx.block_time,
               o_carrier_id=0, o_ol_cnt=len(order_lines), o_all_local=all_local)
    ctx.insert("new_order", no_w_id=w_id, no_d_id=d_id, no_o_id=o_id)
    ctx.update("customer", (w_id, d_id, c_id), c_last_o_id=o_id)

    subtotal = 0
    for number, (i_id, supply_w_id, quantity) in enumerate(order_lines, start=1):
        item = ctx.get("item", i_id)
        if item is None:
            raise ExecutionError(f"unknown item {i_id}")
        stock = ctx.require("stock", supply_w_id, i_id)
        remaining = stock["s_quantity"] - quantity
        if stock["s_quantity"] < quantity + 10:
            remaining += 91
        ctx.update("stock", (supply_w_id, i_id), s_quantity=remaining, s_ytd=stock["s_ytd"] + quantity,
                   s_order_cnt=stock["s_order_cnt"] + 1,
                   s_remote_cnt=stock["s_remote_cnt"] + int(supply_w_id != w_id))
        amount = quantity * item["i_price"]
        subtotal += amount
        ctx.insert("order_line", ol_w_id=w_id, ol_d_id=d_id, ol_o_id=o_id, ol_number=number, ol_i_id=i_id,
                   ol_supply_w_id=supply_w_id, ol_delivery_d=0, ol_quantity=quantity, ol_amount=amount,
                   ol_dist_info=stock["s_dist"])

    tax = BASIS_POINTS + warehouse["w_tax"] + district["d_tax"]
    total = subtotal * (BASIS_POINTS - customer["c_discount"]) * tax // (BASIS_POINTS * BASIS_POINTS)
    return QueryResult((Column("o_id", INT), Column("total", DEC)), ((o_id, total),))


def payment(ctx, w_id, d_id, c_w_id, c_d_id, c_id, amount):
    if amount <= 0:
        raise ExecutionError("payment amount must be positive")
    warehouse = ctx.require("warehouse", w_id)
    district = ctx.require("district", w_id, d_id)
    customer = ctx.require("customer", c_w_id, c_d_id, c_id)

    ctx.update("warehouse", (w_id,), w_ytd=warehouse["w_ytd"] + amount)
    h_id = district["d_next_h_id"]
    ctx.update("district", (w_id, d_id), d_ytd=district["d_ytd"] + amount, d_next_h_id=h_id + 1)

    changes = dict(c_balance=customer["c_balance"] - amount,
                   c_ytd_payment=customer["c_ytd_payment"] + amount,
                   c_payment_cnt=customer["c_payment_cnt"] + 1)
    if customer["c_credit"] == "BC":
        entry = f"{c_id} {c_d_id} {c_w_id} {d_id} {w_id} {format_decimal(amount)}|"
        changes["c_data"] = (entry + customer["c_data"])[:MAX_DATA]
    ctx.update("customer", (c_w_id, c_d_id, c_id), **changes)

    ctx.insert("history", h_w_id=w_id, h_d_id=d_id, h_id=h_id, h_c_id=c_id, h_c_d_id=c_d_id, h_c_w_id=c_w_id,
               h_date=ctx.block_time, h_amount=amount,
               h_data=warehouse["w_name"] + "    " + district["d_name"])


ORDER_STATUS_COLUMNS = (Column("c_balance", DEC), Column("o_id", INT), Column("o_entry_d", INT),
                        Column("o_carrier_id", INT), Column("ol_i_id", INT), Column("ol_supply_w_id", INT),
                        Column("ol_quantity", INT), Column("ol_amount", DEC), Column("ol_delivery_d", INT))


def order_status(ctx, w_id, d_id, c_id):
    """The customer's most recent order, one row per order line."""
    customer = ctx.require("customer", w_id, d_id, c_id)
    o_id = customer["c_last_o_id"]
    order = ctx.require("orders", w_id, d_id, o_id)
    rows = []
    for number in range(1, order["o_ol_cnt"] + 1):
        line = ctx.require("order_line", w_id, d_id, o_id, number)
        rows.append((customer["c_balance"], o_id, order["o_entry_d"], order["o_carrier_id"], line["ol_i_id"],
                     line["ol_supply_w_id"], line["ol_quantity"], line["ol_amount"], line["ol_delivery_d"]))
    return QueryResult(ORDER_STATUS_COLUMNS, tuple(rows))


def tpcc_procedures():
    return [
        StoredProcedure(NEW_ORDER, (INT, INT, INT, STR), new_order),
        StoredProcedure(PAYMENT, (INT, INT, INT, INT, INT, DEC), payment),
        StoredProcedure(ORDER_STATUS, (INT, INT, INT), order_status, read_only=True),
    ]


# statement generator


def _new_order_call(rng, config, w_id, d_id):
    c_id = nurand(rng, 1023, 1, config.customers)
    lines = []
    for _ in range(rng.uniform(5, 15)):
        i_id = nurand(rng, 8191, 1, config.items)
        supply = w_id
        if rng.uniform(1, 100) == 1:
            supply = other_warehouse(rng, w_id, config.warehouses)
        lines.append((i_id, supply, rng.uniform(1, 10)))
    return f"CALL {NEW_ORDER}({w_id}, {d_id}, {c_id}, '{format_order_lines(lines)}')"


def _payment_call(rng, config, w_id, d_id):
    c_id = nurand(rng, 1023, 1, config.customers)
    c_w_id, c_d_id = w_id, d_id
    if rng.uniform(1, 100) > 85:
        c_d_id = rng.uniform(1, config.districts)
        c_w_id = other_warehouse(rng, w_id, config.warehouses)
    amount = rng.uniform(100, 500_000)
    return f"CALL {PAYMENT}({w_id}, {d_id}, {c_w_id}, {c_d_id}, {c_id}, {format_decimal(amount)})"


def _order_status_call(rng, config, w_id, d_id):
    return f"CALL {ORDER_STATUS}({w_id}, {d_id}, {nurand(rng, 1023, 1, config.customers)})"


def tpcc_kind(config, rng):
    draw = rng.uniform(0, config.new_order_weight + config.payment_weight + config.order_status_weight - 1)
    if draw < config.new_order_weight:
        return NEW_ORDER
    if draw < config.new_order_weight + config.payment_weight:
        return PAYMENT
    return ORDER_STATUS


_CALLS = {NEW_ORDER: _new_order_call, PAYMENT: _payment_call, ORDER_STATUS: _order_status_call}


def tpcc_next(config, i):
    if i < 0:
        raise ValueError(f"statement index must be non-negative, got {i}")
    rng = stream(config.seed, i)
    kind = tpcc_kind(config, rng)
    w_id = rng.uniform(1, config.warehouses)
    d_id = rng.uniform(1, config.districts)
    return WlStatement(_CALLS[kind](rng, config, w_id, d_id), CLIENT_ID, i)


def tpcc_order_status(config, i):
    """Statement i of a read-only OrderStatus stream (the query-bypass runs)."""
    rng = stream(config.seed, i)
    w_id = rng.uniform(1, config.warehouses)
    d_id = rng.uniform(1, config.districts)
    return WlStatement(_order_status_call(rng, config, w_id, d_id), CLIENT_ID, i)


class Tpcc(Workload):
    name = "tpcc"
    schema_file = "tpcc.schema"

    def population(self):
        return tpcc_rows(self.config)

    def procedures(self):
        return tpcc_procedures()

    def next_statement(self, i):
        return tpcc_next(self.config, i)

    def query_statement(self, i):
        return tpcc_order_status(self.config, i)


def tpcc_init(config):
    """(schemas, {table: rows}) of the genesis state."""
    return Tpcc(config).schemas(), tpcc_rows(config)
