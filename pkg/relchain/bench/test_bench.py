import pandas as pd
import pytest

from relchain.bench.drivers import open_network, run_async, run_queries, run_sync
from relchain.bench.get_driver import get_driver
from relchain.bench.metrics import CSV_COLUMNS, PackingRecord, emit_csv
from relchain.bench.replay import replay_standalone
from relchain.bench.run_runs import run_once, run_repetitions
from relchain.bench.sweep import aggregate, ci95_halfwidth, sweep
from relchain.config import RunConfig, validated
from relchain.errors import ConfigError, VerificationFailure
from relchain.ledger import WlStatement
from relchain.workloads import get_workload

SMALLBANK = {"n_accounts": 200}
TPCC = {"warehouses": 1, "customers": 30, "items": 100}
BAD_STATEMENT = "UPDATE accounts SET balance = 0 WHERE custid = 3"


def run_config(mode="async", n_txs=200, batch=1, timeout_commit=100.0, n_nodes=4, **kwargs):
    data = {"run_id": "test", "workload": "smallbank", "workload_params": SMALLBANK, "mode": mode,
            "batch": batch, "n_txs": n_txs, "repetitions": 1,
            "network": {"n_nodes": n_nodes, "node": {"timeouts": {"commit": timeout_commit}}}}
    data.update(kwargs)
    return validated(RunConfig, **data)


def test_async_counts_are_sound():
    config = run_config(n_txs=300, batch=4)
    report = run_async(config)
    assert report.n_txs == 300
    assert report.bc_txs == 75
    assert report.packing.n_statements == 300
    assert sum(n for _, _, n in report.block_latencies) == report.bc_txs
    assert report.check_conservation()
    assert sorted(s.seq_no for s in report.packing.statements()) == list(range(300))
    assert len(report.latencies_ms) == 300
    assert report.blocks == len(report.packing.blocks) >= 2
    assert report.end_to_end_ms >= max(report.latencies_ms)


def test_sync_and_pseudo_sync_submit_one_tx_at_a_time():
    sync = run_sync(run_config(mode="sync", n_txs=20))
    assert (sync.bc_txs, sync.n_txs, sync.blocks) == (20, 20, 20)
    pseudo = run_sync(run_config(mode="pseudo-sync", n_txs=20, batch=8))
    assert (pseudo.bc_txs, pseudo.n_txs, pseudo.blocks) == (3, 20, 3)
    assert [len(b.statements) for b in pseudo.packing.blocks] == [8, 8, 4]
    assert len(pseudo.latencies_ms) == 20
    # the batch latency is spread over its statements
    assert pseudo.latencies_ms[0] == pseudo.latencies_ms[7]


def test_runs_are_deterministic_across_nodes_and_repetitions():
    config = run_config(n_txs=1000)
    hashes, exports = set(), set()
    for _ in range(3):
        with open_network(config) as network:
            report = run_async(config, network=network)
            # the driver returns once the observed node committed; let the others catch up
            assert network.run_until_height(max(network.report().heights), timeout_ms=60_000)
            exports.update(node.ledger.export_bytes() for node in network.nodes)
            hashes.update(node.app_hash for node in network.nodes)
        hashes.add(report.app_hash)
    assert len(exports) == 1
    assert len(hashes) == 1


def test_failed_statement_rolls_back_its_block_only():
    config = run_config(n_txs=50)
    workload = get_workload("smallbank", **config.workload_config())
    statements = workload.sequence(50)
    statements[25] = WlStatement(BAD_STATEMENT, "test", 25)
    genesis = workload.make_engine().state_hash()
    with open_network(config, workload) as network:
        with pytest.raises(VerificationFailure) as info:
            run_async(config, network=network, statements=statements, workload=workload)
        report = info.value.report
        (failure,) = report.failures
        assert failure.text == BAD_STATEMENT
        assert "unknown column" in failure.reason

        rpc = network.rpc(0)
        tip = network.nodes[0].ledger.height
        post_states = [rpc.fetch_block(h + 1)[0].header.app_hash for h in range(1, tip)]
        post_states.append(network.nodes[0].app_hash)
        pre_states = [rpc.fetch_block(h)[0].header.app_hash for h in range(1, tip + 1)]
        changed = [h for h, (pre, post) in enumerate(zip(pre_states, post_states), start=1) if pre != post]
        assert failure.height not in changed
        assert changed == [h for h in range(1, tip + 1) if h != failure.height]
        assert pre_states[0] == genesis
    # the packing still holds every statement, so a replay reaches the same state
    assert replay_standalone(report.packing, workload).app_hash == report.app_hash


def test_single_bad_statement_leaves_genesis_state():
    config = run_config(mode="sync")
    workload = get_workload("smallbank", **config.workload_config())
    with pytest.raises(VerificationFailure) as info:
        run_sync(config, statements=[WlStatement(BAD_STATEMENT, "test", 0)], workload=workload)
    (failure,) = info.value.report.failures
    assert (failure.height, failure.tx_index, failure.statement_index) == (1, 0, 0)
    assert info.value.report.app_hash == workload.make_engine().state_hash()


@pytest.mark.parametrize("workload, params, n_txs", [
    ("smallbank", SMALLBANK, 2000),
    ("tpcc", TPCC, 300),
    pytest.param("smallbank", SMALLBANK, 10_000, marks=pytest.mark.slow),
    pytest.param("tpcc", TPCC, 1_000, marks=pytest.mark.slow),
])
def test_standalone_replay_reaches_the_chain_state(tmp_path, workload, params, n_txs):
    config = run_config(workload=workload, workload_params=params, n_txs=n_txs, batch=10)
    report = run_once(config)
    assert report.standalone_ms is not None and report.standalone_ms >= 0
    path = tmp_path / "packing.json"
    report.packing.save(path)
    baseline = replay_standalone(PackingRecord.load(path))
    assert baseline.app_hash == report.app_hash
    assert baseline.n_txs == n_txs
    assert baseline.blocks == report.blocks


def test_async_beats_sync():
    sync = run_sync(run_config(mode="sync", n_txs=100))
    asynchronous = run_async(run_config(n_txs=100))
    assert asynchronous.end_to_end_ms * 2 <= sync.end_to_end_ms
    assert asynchronous.blocks < sync.blocks


def test_batching_shortens_the_run():
    runtimes = []
    for batch in (1, 8, 64):
        mode = "sync" if batch == 1 else "pseudo-sync"
        runtimes.append(run_sync(run_config(mode=mode, n_txs=256, batch=batch)).end_to_end_ms)
    assert runtimes[2] * 3 <= runtimes[0]
    assert runtimes[0] >= runtimes[1] >= runtimes[2]


@pytest.mark.slow
def test_batching_trend_over_a_thousand_statements():
    runtimes = []
    for batch in (1, 8, 64, 512):
        mode = "sync" if batch == 1 else "pseudo-sync"
        runtimes.append(run_sync(run_config(mode=mode, n_txs=1000, batch=batch)).end_to_end_ms)
    assert runtimes[2] * 3 <= runtimes[0]
    assert all(later <= 1.1 * earlier for earlier, later in zip(runtimes, runtimes[1:]))


def test_longer_timeout_commit_slows_the_run():
    fast = run_async(run_config(n_txs=500, timeout_commit=100.0))
    slow = run_async(run_config(n_txs=500, timeout_commit=1000.0))
    assert slow.end_to_end_ms > fast.end_to_end_ms


def test_timeout_commit_changes_timing_only():
    chains, runtimes = {}, {}
    for timeout in (0.0, 100.0):
        config = run_config(mode="pseudo-sync", n_txs=40, batch=4, timeout_commit=timeout)
        with open_network(config) as network:
            runtimes[timeout] = run_sync(config, network=network).end_to_end_ms
            assert network.run_until_height(max(network.report().heights), timeout_ms=60_000)
            for node in network.nodes:
                blocks = [node.ledger.get_block(h) for h in range(1, node.ledger.height + 1)]
                chains.setdefault(timeout, set()).add(tuple(
                    (block.txs, block.header.app_hash, tuple(map(tuple, statuses))) for block, statuses in blocks))
    assert len(chains[0.0]) == len(chains[100.0]) == 1
    assert chains[0.0] == chains[100.0]
    assert len(next(iter(chains[0.0]))) == 10
    assert runtimes[0.0] < runtimes[100.0]


def test_one_node_is_faster_than_four():
    reports = {n: run_async(run_config(n_txs=300, n_nodes=n, latency_profile="lan")) for n in (1, 4, 8)}
    assert reports[1].end_to_end_ms < reports[4].end_to_end_ms
    assert reports[8].end_to_end_ms < 2 * reports[4].end_to_end_ms


def test_queries_bypass_the_chain():
    config = run_config(workload="tpcc", workload_params=TPCC, n_txs=100, queries=True)
    assert get_driver(config) is run_queries
    with open_network(config) as network:
        genesis = network.nodes[0].app_hash
        report = run_queries(config, network=network)
        assert network.report().heights == (0, 0, 0, 0)
        assert network.nodes[0].app_hash == genesis
    assert (report.mode, report.n_txs, report.blocks, report.packing) == ("query", 100, 0, None)

    workload = get_workload("tpcc", **config.workload_config())
    writes = [workload.query_statement(i) for i in range(100)]
    through_chain = run_async(run_config(workload="tpcc", workload_params=TPCC), statements=writes)
    assert through_chain.blocks > 0
    assert report.end_to_end_ms < through_chain.end_to_end_ms


def test_sweep_aggregates_repetitions(tmp_path):
    config = run_config(mode="sync", n_txs=16, repetitions=2)
    raw, summary = sweep(config, "batch", values=[1, 4], save_path=tmp_path, replay=False)
    assert list(raw["value"]) == [1, 1, 4, 4]
    assert list(raw["mode"]) == ["sync", "sync", "pseudo-sync", "pseudo-sync"]
    assert list(summary["reps"]) == [2, 2]
    assert summary["end_to_end_ms_mean"].iloc[0] > summary["end_to_end_ms_mean"].iloc[1]
    # virtual repetitions are identical
    assert (summary["end_to_end_ms_min"] == summary["end_to_end_ms_max"]).all()
    assert (summary["end_to_end_ms_ci95"] == 0).all()
    assert (tmp_path / "raw.csv").exists() and (tmp_path / "sweep.csv").exists()
    with pytest.raises(ConfigError):
        sweep(config, "clients")


def test_aggregate_columns():
    frame = pd.DataFrame({"value": [1, 1, 2], **{c: [1.0, 3.0, 5.0] for c in CSV_COLUMNS if c != "value"}})
    summary = aggregate(frame, "batch")
    assert list(summary["dimension"]) == ["batch", "batch"]
    assert list(summary["end_to_end_ms_mean"]) == [2.0, 5.0]
    assert summary["end_to_end_ms_ci95"].iloc[0] == pytest.approx(12.7062, rel=1e-3)
    assert pd.isna(summary["end_to_end_ms_ci95"].iloc[1])
    assert pd.isna(ci95_halfwidth([4.0]))


def test_results_csv_has_the_documented_columns(tmp_path):
    reports = run_repetitions(run_config(n_txs=20, repetitions=2), save_path=tmp_path)
    frame = pd.read_csv(tmp_path / "results.csv")
    assert tuple(frame.columns) == CSV_COLUMNS
    assert list(frame["n_txs"]) == [20, 20]
    assert frame["overhead_ratio"].notna().all()
    emit_csv(reports[:1], tmp_path / "one" / "r.csv")
    assert len(pd.read_csv(tmp_path / "one" / "r.csv")) == 1


def test_run_config_validation():
    with pytest.raises(ConfigError):
        run_config(mode="sync", batch=4)
    with pytest.raises(ConfigError):
        run_config(mode="pseudo-sync", batch=1)
    with pytest.raises(ConfigError):
        run_config(queries=True)
    with pytest.raises(ConfigError):
        run_config(latency_profile="moon").network_config()
    assert validated(RunConfig, mode="sync").n_txs == 1_000
    assert run_config().with_point("batch", 16).batch == 16
    assert run_config(mode="sync").with_point("batch", 16).mode == "pseudo-sync"
    assert run_config().with_point("timeout_commit", 25).timeout_commit_ms == 25


@pytest.mark.slow
def test_realtime_overhead_is_larger_for_simpler_statements():
    ratios = {}
    for workload, params in (("smallbank", SMALLBANK), ("tpcc", TPCC)):
        config = run_config(workload=workload, workload_params=params, n_txs=1000, batch=10,
                            network={"clock": "realtime", "node": {"timeouts": {"commit": 100.0}}})
        ratios[workload] = run_once(config).overhead_ratio
    assert ratios["tpcc"] < ratios["smallbank"]


@pytest.mark.slow
def test_socket_backend_is_slower_in_realtime():
    reports = {}
    for variant in ("builtin", "server"):
        config = run_config(n_txs=1000, network={"clock": "realtime", "abci_variant": variant,
                                                 "node": {"timeouts": {"commit": 0.0}}})
        reports[variant] = run_async(config)
    assert reports["server"].app_hash == reports["builtin"].app_hash
    assert reports["server"].processing_ms > reports["builtin"].processing_ms
