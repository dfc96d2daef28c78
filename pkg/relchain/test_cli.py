import pandas as pd
import yaml

from relchain.bench.metrics import CSV_COLUMNS
from relchain.cli import EXIT_ERROR, EXIT_OK, EXIT_VERIFICATION, main
from setup.utils import load_json, save_json

SMALL_RUN = ["--workload", "smallbank", "--accounts", "50", "--txs", "30", "--reps", "1", "--clock", "virtual"]


def test_bench_then_replay(tmp_path):
    out, packing = tmp_path / "results.csv", tmp_path / "packing.json"
    assert main(["bench", *SMALL_RUN, "--mode", "async", "--batch", "3", "--out", str(out),
                 "--packing-out", str(packing)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert tuple(frame.columns) == CSV_COLUMNS
    assert frame["n_txs"].tolist() == [30]
    assert frame["bc_txs"].tolist() == [10]

    assert main(["replay", "--packing", str(packing), "--out", str(tmp_path / "replay.csv")]) == EXIT_OK
    assert pd.read_csv(tmp_path / "replay.csv")["mode"].tolist() == ["standalone"]

    record = load_json(packing)
    record["app_hash"] = "00" * 32
    save_json(record, packing)
    assert main(["replay", "--packing", str(packing)]) == EXIT_VERIFICATION


def test_invalid_configuration_exits_with_one(tmp_path):
    assert main(["bench", *SMALL_RUN, "--mode", "sync", "--batch", "4", "--out", str(tmp_path / "r.csv")]) \
        == EXIT_ERROR
    assert main(["bench", *SMALL_RUN, "--latency-profile", "moon", "--out", str(tmp_path / "r.csv")]) == EXIT_ERROR
    assert not (tmp_path / "r.csv").exists()


def test_yaml_config_with_flag_overrides(tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text(yaml.safe_dump({"run_id": "from-yaml", "workload": "smallbank",
                                      "workload_params": {"n_accounts": 40}, "mode": "sync", "n_txs": 5,
                                      "repetitions": 2, "network": {"n_nodes": 1}}))
    out = tmp_path / "results.csv"
    assert main(["bench", "--config", str(config), "--reps", "1", "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert frame[["run_id", "mode", "n_nodes", "n_txs"]].values.tolist() == [["from-yaml", "sync", 1, 5]]


def test_sweep_writes_raw_and_aggregate(tmp_path):
    out = tmp_path / "sweep"
    # one block per tx, so every block pays the commit wait
    assert main(["sweep", *SMALL_RUN, "--mode", "sync", "--dimension", "timeout_commit", "--values", "50,500",
                 "--out", str(out)]) == EXIT_OK
    summary = pd.read_csv(out / "sweep.csv")
    assert summary["value"].tolist() == [50.0, 500.0]
    assert summary["end_to_end_ms_mean"].iloc[0] < summary["end_to_end_ms_mean"].iloc[1]
    assert len(pd.read_csv(out / "raw.csv")) == 2
