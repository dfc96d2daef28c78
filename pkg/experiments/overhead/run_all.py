"""
This code runs the overhead experiments on the generated workload sequences:
batching, timeout_commit, network size, ABCI variant, sync against async
and the query bypass. Every experiment writes raw.csv and sweep.csv.
"""
from relchain.bench.run_runs import run_repetitions
from relchain.bench.metrics import emit_csv
from relchain.bench.sweep import sweep
from relchain.config import RunConfig
from relchain.ledger.types import WlStatement
from setup.setup import RESULTS_PATH
from setup.utils import create_directory, load_json


def load_sequence(load_data_path):
    params = load_json(load_data_path / "workload.json")
    statements = [WlStatement(*s) for s in load_json(load_data_path / "statements.json")]
    return params, statements


def base_config(workload_name, params, run_id, **overrides):
    params = dict(params)
    seed = params.pop("seed")
    return RunConfig(run_id=run_id, workload=workload_name, workload_params=params, seed=seed,
                     **{"network": {"clock": "realtime"}, **overrides})


def run_experiments(workload_name, params, statements, save_path):
    print(f"RUN batching ({workload_name})")
    sync = base_config(workload_name, params, "batching", mode="sync", n_txs=1_000)
    sweep(sync, "batch", values=[1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048],
          statements=statements[:1_000], save_path=save_path / "batching")

    print(f"RUN timeout_commit ({workload_name})")
    asynchronous = base_config(workload_name, params, "timeout", mode="async", n_txs=len(statements))
    sweep(asynchronous, "timeout_commit", statements=statements, save_path=save_path / "timeout_commit")

    print(f"RUN nodes ({workload_name})")
    sweep(asynchronous.model_copy(update={"run_id": "nodes", "repetitions": 10,
                                          "latency_profile": "four-regions"}),
          "nodes", statements=statements, save_path=save_path / "nodes")

    print(f"RUN abci variants ({workload_name})")
    for variant in ["builtin", "server"]:
        config = base_config(workload_name, params, f"abci-{variant}", mode="async", n_txs=len(statements),
                             network={"clock": "realtime", "abci_variant": variant})
        reports = run_repetitions(config, statements=statements)
        create_directory(save_path / "abci")
        emit_csv(reports, save_path / "abci" / f"{variant}.csv")


def run_query_bypass(params, save_path):
    print("RUN query bypass (tpcc)")
    read_only = {**params, "order_status_weight": 1, "new_order_weight": 0, "payment_weight": 0}
    for queries in [True, False]:
        config = base_config("tpcc", read_only, "query" if queries else "write-path", mode="async", n_txs=1_000,
                             queries=queries)
        reports = run_repetitions(config, replay=not queries)
        create_directory(save_path / "query")
        emit_csv(reports, save_path / "query" / f"{config.run_id}.csv")


if __name__ == "__main__":
    # workspace has to be the same with one we used when we generate the workloads
    workspace_dir = RESULTS_PATH / "overhead"
    for workload_name in ["smallbank", "tpcc"]:
        for seed in [0, 1, 2]:
            load_data_path = workspace_dir / "data" / f"{workload_name}_seed_{seed}"
            params, statements = load_sequence(load_data_path)
            print("**************************")
            print(f"** Run {workload_name} seed {seed} with {len(statements)} statements **")
            print("**************************")
            run_experiments(workload_name, params, statements, save_path=workspace_dir / f"{workload_name}_seed_{seed}")
    params, _ = load_sequence(workspace_dir / "data" / "tpcc_seed_0")
    run_query_bypass(params, save_path=workspace_dir)
