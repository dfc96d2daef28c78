"""
Smallbank: one accounts table and five modifying transactions, shipped as
raw SQL text so every statement goes through the parser.
"""
from dataclasses import dataclass

from pydantic import BaseModel, Field, model_validator

from relchain.ledger.types import WlStatement
from relchain.workloads.base import Workload
from relchain.workloads.rng import population_rng, stream

TRANSACT_SAVINGS = "TransactSavings"
DEPOSIT_CHECKING = "DepositChecking"
SEND_PAYMENT = "SendPayment"
WRITE_CHECK = "WriteCheck"
AMALGAMATE = "Amalgamate"
OP_KINDS = (TRANSACT_SAVINGS, DEPOSIT_CHECKING, SEND_PAYMENT, WRITE_CHECK, AMALGAMATE)

CLIENT_ID = "smallbank"


class SmallbankConfig(BaseModel):
    # SendPayment needs two distinct accounts
    n_accounts: int = Field(100_000, ge=2)
    min_amount: int = Field(1, ge=1)
    max_amount: int = Field(100, ge=1)
    min_balance: int = Field(10_000, ge=0)
    max_balance: int = Field(50_000, ge=0)
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.min_amount > self.max_amount:
            raise ValueError("min_amount must not exceed max_amount")
        if self.min_balance > self.max_balance:
            raise ValueError("min_balance must not exceed max_balance")
        return self


@dataclass(frozen=True)
class SmallbankOp:
    kind: str
    custid: int
    amount: int = 0
    custid2: int = 0

    def sql(self):
        if self.kind == TRANSACT_SAVINGS:
            return f"UPDATE accounts SET savings = savings + {self.amount} WHERE custid = {self.custid}"
        if self.kind == DEPOSIT_CHECKING:
            return f"UPDATE accounts SET checking = checking + {self.amount} WHERE custid = {self.custid}"
        if self.kind == SEND_PAYMENT:
            return (f"UPDATE accounts SET checking = checking - {self.amount} WHERE custid = {self.custid}; "
                    f"UPDATE accounts SET checking = checking + {self.amount} WHERE custid = {self.custid2}")
        if self.kind == WRITE_CHECK:
            return f"UPDATE accounts SET checking = checking - {self.amount} WHERE custid = {self.custid}"
        return f"UPDATE accounts SET checking = checking + savings, savings = 0 WHERE custid = {self.custid}"

    @property
    def total_delta(self):
        """Change of the global checking + savings sum, in whole units."""
        if self.kind in (TRANSACT_SAVINGS, DEPOSIT_CHECKING):
            return self.amount
        if self.kind == WRITE_CHECK:
            return -self.amount
        return 0


def smallbank_op(config, i):
    rng = stream(config.seed, i)
    kind = OP_KINDS[rng.uniform(0, len(OP_KINDS) - 1)]
    custid = rng.uniform(1, config.n_accounts)
    if kind == AMALGAMATE:
        return SmallbankOp(kind, custid)
    amount = rng.uniform(config.min_amount, config.max_amount)
    if kind != SEND_PAYMENT:
        return SmallbankOp(kind, custid, amount)
    custid2 = rng.uniform(1, config.n_accounts - 1)
    if custid2 >= custid:
        custid2 += 1
    return SmallbankOp(kind, custid, amount, custid2)


def smallbank_next(config, i):
    if i < 0:
        raise ValueError(f"statement index must be non-negative, got {i}")
    return WlStatement(smallbank_op(config, i).sql(), CLIENT_ID, i)


def smallbank_rows(config):
    """Genesis rows; balances are stored as decimal cents."""
    rng = population_rng(config.seed)
    for custid in range(1, config.n_accounts + 1):
        checking = rng.uniform(config.min_balance, config.max_balance)
        savings = rng.uniform(config.min_balance, config.max_balance)
        yield custid, f"cust{custid:06d}", checking * 100, savings * 100


class Smallbank(Workload):
    name = "smallbank"
    schema_file = "smallbank.schema"

    def population(self):
        return {"accounts": smallbank_rows(self.config)}

    def next_statement(self, i):
        return smallbank_next(self.config, i)


def smallbank_init(config):
    """(schemas, {table: rows}) of the genesis state."""
    workload = Smallbank(config)
    return workload.schemas(), {"accounts": list(smallbank_rows(config))}
