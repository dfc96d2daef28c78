from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from relchain.errors import ConfigError, ExecutionError
from relchain.workloads import SWEEP_BATCH_SIZES, batch, get_workload, unbatch
from relchain.workloads.rng import SplitMix64, stream
from relchain.workloads.smallbank import (DEPOSIT_CHECKING, OP_KINDS, SEND_PAYMENT, TRANSACT_SAVINGS, WRITE_CHECK,
                                          SmallbankConfig, smallbank_op)
from relchain.workloads.tpcc import NEW_ORDER, ORDER_STATUS, PAYMENT, TpccConfig, last_name, parse_order_lines

SMALL_TPCC = dict(warehouses=1, districts=2, customers=30, items=50)


def test_splitmix64_reference_values():
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    assert SplitMix64(5).token(20) == SplitMix64(5).token(20)
    assert len(SplitMix64(5).token(20)) == 20


def splitmix_outputs(count):
    """Outputs 1..count of SplitMix64(0), computed as a counter-based hash with numpy."""
    z = np.arange(1, count + 1, dtype=np.uint64) * np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return (z ^ (z >> np.uint64(31))).tolist()


SMALLBANK_TEMPLATES = {
    0: "UPDATE accounts SET savings = savings + {a} WHERE custid = {c}",
    1: "UPDATE accounts SET checking = checking + {a} WHERE custid = {c}",
    2: "UPDATE accounts SET checking = checking - {a} WHERE custid = {c}; "
       "UPDATE accounts SET checking = checking + {a} WHERE custid = {c2}",
    3: "UPDATE accounts SET checking = checking - {a} WHERE custid = {c}",
    4: "UPDATE accounts SET checking = checking + savings, savings = 0 WHERE custid = {c}",
}


def test_first_hundred_smallbank_statements_match_a_second_generator():
    n_accounts = 15
    outputs = splitmix_outputs(104)
    assert outputs[:3] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    expected = []
    for i in range(100):
        # statement i is seeded (i + 1) * GAMMA, so its k-th draw is output i + k + 2
        draws = outputs[i + 1:i + 5]
        kind, custid, amount = draws[0] % 5, 1 + draws[1] % n_accounts, 1 + draws[2] % 100
        custid2 = 1 + draws[3] % (n_accounts - 1)
        if custid2 >= custid:
            custid2 += 1
        expected.append(SMALLBANK_TEMPLATES[kind].format(a=amount, c=custid, c2=custid2))

    statements = get_workload("smallbank", n_accounts=n_accounts, seed=0).sequence(100)
    assert [s.text for s in statements] == expected
    assert [s.seq_no for s in statements] == list(range(100))
    # hand-checked from the reference outputs: hex digit sums modulo 5 and 15
    assert statements[0].text.startswith("UPDATE accounts SET savings = savings + ")
    assert statements[0].text.endswith("WHERE custid = 5")
    assert "checking = checking + savings, savings = 0" in statements[1].text


def test_statements_are_pure_functions_of_config_and_index():
    first = get_workload("smallbank", n_accounts=100, seed=4)
    again = get_workload("smallbank", n_accounts=100, seed=4)
    assert first.sequence(50) == again.sequence(50)
    assert first.sequence(10, start=40) == first.sequence(50)[40:]
    assert [s.seq_no for s in first.sequence(3, start=7)] == [7, 8, 9]
    assert first.sequence(50) != get_workload("smallbank", n_accounts=100, seed=5).sequence(50)
    tpcc = get_workload("tpcc", **SMALL_TPCC)
    assert tpcc.next_statement(17) == tpcc.sequence(20)[17]


def test_smallbank_mix_is_uniform():
    config = SmallbankConfig(n_accounts=1000)
    counts = Counter(smallbank_op(config, i).kind for i in range(5000))
    assert set(counts) == set(OP_KINDS)
    assert chisquare([counts[kind] for kind in OP_KINDS]).pvalue > 1e-4


def test_smallbank_draws_stay_in_range():
    config = SmallbankConfig(n_accounts=2)
    for i in range(500):
        op = smallbank_op(config, i)
        assert 1 <= op.custid <= 2
        if op.kind == SEND_PAYMENT:
            assert op.custid2 != op.custid and 1 <= op.custid2 <= 2
        if op.amount:
            assert config.min_amount <= op.amount <= config.max_amount


def test_smallbank_genesis_population():
    workload = get_workload("smallbank", n_accounts=25)
    rows = list(workload.population()["accounts"])
    assert [row[0] for row in rows] == list(range(1, 26))
    assert rows[0][1] == "cust000001"
    assert all(10_000 * 100 <= balance <= 50_000 * 100 for row in rows for balance in row[2:])


def test_smallbank_matches_a_plain_interpreter():
    config = SmallbankConfig(n_accounts=20, seed=9)
    workload = get_workload("smallbank", **config.model_dump())
    engine = workload.make_engine()
    expected = {row[0]: [row[2], row[3]] for row in engine.db.scan("accounts")}
    total = sum(c + s for c, s in expected.values())

    engine.begin(block_time=1)
    for i in range(300):
        assert engine.execute(workload.next_statement(i).text).ok
        op = smallbank_op(config, i)
        account = expected[op.custid]
        amount = op.amount * 100
        if op.kind == TRANSACT_SAVINGS:
            account[1] += amount
        elif op.kind == DEPOSIT_CHECKING:
            account[0] += amount
        elif op.kind == SEND_PAYMENT:
            account[0] -= amount
            expected[op.custid2][0] += amount
        elif op.kind == WRITE_CHECK:
            account[0] -= amount
        else:
            account[0], account[1] = account[0] + account[1], 0
        total += op.total_delta * 100
    engine.commit_block()

    actual = {row[0]: [row[2], row[3]] for row in engine.db.scan("accounts")}
    assert actual == expected
    assert sum(c + s for c, s in actual.values()) == total


def test_tpcc_genesis_population():
    config = TpccConfig(**SMALL_TPCC)
    tables = get_workload("tpcc", **SMALL_TPCC).population()
    assert len(tables["item"]) == len(tables["stock"]) == 50
    assert len(tables["district"]) == 2
    assert len(tables["customer"]) == len(tables["orders"]) == len(tables["history"]) == 60
    undelivered = config.customers - config.new_order_threshold + 1
    assert len(tables["new_order"]) == 2 * undelivered
    # every customer owns exactly one initial order per district
    for d_id in (1, 2):
        owners = sorted(row[3] for row in tables["orders"] if row[1] == d_id)
        assert owners == list(range(1, 31))
    assert last_name(371) == "PRICALLYOUGHT"


def district(engine, d_id, *columns):
    result = engine.snapshot_query(f"SELECT {', '.join(columns)} FROM district WHERE d_w_id = 1 AND d_id = {d_id}")
    return result.rows[0]


def test_tpcc_new_order_and_order_status():
    engine = get_workload("tpcc", **SMALL_TPCC).make_engine()
    (next_o_id,) = district(engine, 1, "d_next_o_id")
    assert next_o_id == 31

    engine.begin(block_time=1000)
    status = engine.execute(f"CALL {NEW_ORDER}(1, 1, 5, '1:1:3,2:1:4')")
    assert status.ok
    engine.commit_block()
    assert district(engine, 1, "d_next_o_id") == (32,)
    assert district(engine, 2, "d_next_o_id") == (31,)

    result = engine.snapshot_query(f"CALL {ORDER_STATUS}(1, 1, 5)")
    records = result.records()
    assert [(r["o_id"], r["o_entry_d"], r["ol_i_id"], r["ol_quantity"]) for r in records] == \
        [(31, 1000, 1, 3), (31, 1000, 2, 4)]
    assert engine.snapshot_query("SELECT no_o_id FROM new_order WHERE no_w_id = 1 AND no_d_id = 1 "
                                 "AND no_o_id = 31").rows == ((31,),)


def test_tpcc_payment_moves_money():
    engine = get_workload("tpcc", **SMALL_TPCC).make_engine()
    before = engine.snapshot_query("SELECT c_balance, c_payment_cnt FROM customer "
                                   "WHERE c_w_id = 1 AND c_d_id = 2 AND c_id = 7").rows[0]
    (ytd,) = engine.snapshot_query("SELECT w_ytd FROM warehouse WHERE w_id = 1").rows[0]

    engine.begin(block_time=5)
    assert engine.execute(f"CALL {PAYMENT}(1, 2, 1, 2, 7, 12.34)").ok
    engine.commit_block()

    after = engine.snapshot_query("SELECT c_balance, c_payment_cnt FROM customer "
                                  "WHERE c_w_id = 1 AND c_d_id = 2 AND c_id = 7").rows[0]
    assert after == (before[0] - 1234, before[1] + 1)
    assert engine.snapshot_query("SELECT w_ytd FROM warehouse WHERE w_id = 1").rows[0] == (ytd + 1234,)
    assert district(engine, 2, "d_next_h_id") == (32,)
    history = engine.snapshot_query("SELECT h_c_id, h_date, h_amount FROM history "
                                    "WHERE h_w_id = 1 AND h_d_id = 2 AND h_id = 31").rows
    assert history == ((7, 5, 1234),)


def test_tpcc_failed_call_is_undone_with_its_block():
    engine = get_workload("tpcc", **SMALL_TPCC).make_engine()
    genesis = engine.state_hash()
    engine.begin(block_time=1)
    status = engine.execute(f"CALL {NEW_ORDER}(1, 1, 5, '999:1:1')")
    assert not status.ok and "unknown item" in status.reason
    assert not engine.execute(f"CALL {PAYMENT}(1, 1, 1, 1, 5, 0)").ok
    engine.rollback_block()
    assert district(engine, 1, "d_next_o_id") == (31,)
    assert engine.state_hash() == genesis


def test_generated_tpcc_statements_execute():
    workload = get_workload("tpcc", **SMALL_TPCC, order_status_weight=1)
    engine = workload.make_engine()
    engine.begin(block_time=10)
    kinds = Counter()
    for statement in workload.sequence(200):
        kinds[statement.text.split("(")[0]] += 1
        status = engine.execute(statement.text)
        assert status.ok, f"{statement.text}: {status.reason}"
    engine.commit_block()
    assert set(kinds) == {f"CALL {NEW_ORDER}", f"CALL {PAYMENT}", f"CALL {ORDER_STATUS}"}
    assert workload.query_statement(3).text.startswith(f"CALL {ORDER_STATUS}(")


@pytest.mark.parametrize("lines", ["", "1:1", "a:1:1", ",".join(["1:1:1"] * 16)])
def test_malformed_order_lines(lines):
    with pytest.raises(ExecutionError, match="order"):
        parse_order_lines(lines)


def test_batching():
    statements = get_workload("smallbank", n_accounts=10).sequence(10)
    txs = batch(statements, 4)
    assert [len(tx.statements) for tx in txs] == [4, 4, 2]
    assert [tx.nonce for tx in txs] == [0, 1, 2]
    assert unbatch(txs) == statements
    assert len(batch(statements, 2048)) == 1
    assert SWEEP_BATCH_SIZES[0] == 1 and SWEEP_BATCH_SIZES[-1] == 2048
    with pytest.raises(ValueError):
        batch(statements, 0)


def test_workload_config_errors():
    with pytest.raises(ConfigError):
        get_workload("ycsb")
    with pytest.raises(ConfigError):
        get_workload("smallbank", n_accounts=1)
    with pytest.raises(ConfigError):
        get_workload("tpcc", new_order_weight=0, payment_weight=0)


def test_private_streams_do_not_overlap():
    assert stream(0, 0).next_u64() != stream(0, 1).next_u64()
