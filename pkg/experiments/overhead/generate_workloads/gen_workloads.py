"""
The following code generates the workload sequences used in the overhead experiments.

Every sequence is stored as json next to the workload parameters that
produced it, so run_all.py replays exactly the same statements in every
configuration.
"""
from collections import Counter

from relchain.workloads import get_workload
from relchain.workloads.smallbank import smallbank_op
from setup.setup import RESULTS_PATH
from setup.utils import create_directory, save_json


def statement_kind(workload, statement, index):
    if workload.name == "smallbank":
        return smallbank_op(workload.config, index).kind
    return statement.text.split("(")[0].replace("CALL ", "")


def generate_sequence(workload_name, n_txs, seed, **params):
    workload = get_workload(workload_name, seed=seed, **params)
    statements = workload.sequence(n_txs)

    # here we just print some statistics about the sequence
    mix = Counter(statement_kind(workload, s, i) for i, s in enumerate(statements))
    print(f"{workload_name} seed {seed}: {n_txs} statements")
    for kind, count in sorted(mix.items()):
        print(f"  {kind}: {count} ({100 * count / n_txs:.1f}%)")
    return statements, workload.config.model_dump()


if __name__ == "__main__":
    workspace_dir = RESULTS_PATH / "overhead"
    create_directory(workspace_dir)
    sequences = {
        "smallbank": ({"n_accounts": 100_000}, 10_000),
        "tpcc": ({"warehouses": 10, "customers": 300, "items": 10_000}, 1_000),
    }
    for workload_name, (params, n_txs) in sequences.items():
        for seed in [0, 1, 2]:
            statements, config = generate_sequence(workload_name, n_txs, seed, **params)
            save_data_path = workspace_dir / "data" / f"{workload_name}_seed_{seed}"
            create_directory(save_data_path)
            save_json(config, save_data_path / "workload.json")
            save_json([[s.text, s.client_id, s.seq_no] for s in statements], save_data_path / "statements.json")
