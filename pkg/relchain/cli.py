"""
Command line: python -m relchain {bench,sweep,replay} [options]

Exit codes: 0 success, 1 configuration or runtime error, 2 verification
failure (a failed statement, or a replay that does not reach the recorded
app_hash).
"""
import argparse
import logging
import sys

from relchain.bench.metrics import PackingRecord, emit_csv
from relchain.bench.replay import replay_standalone
from relchain.bench.run_runs import run_repetitions
from relchain.bench.sweep import SWEEP_POINTS, sweep
from relchain.config import RunConfig, load_run_config, validated
from relchain.errors import RelchainError, VerificationFailure

logger = logging.getLogger("relchain")

EXIT_OK, EXIT_ERROR, EXIT_VERIFICATION = 0, 1, 2


def add_run_arguments(parser):
    parser.add_argument("--config", type=str, default=None, help="YAML run config; flags override it")
    parser.add_argument("--run-id", type=str, default=None)
    parser.add_argument("--workload", choices=("smallbank", "tpcc"), default=None)
    parser.add_argument("--accounts", type=int, default=None, help="smallbank accounts")
    parser.add_argument("--warehouses", type=int, default=None, help="tpcc warehouses")
    parser.add_argument("--customers", type=int, default=None, help="tpcc customers per district")
    parser.add_argument("--items", type=int, default=None, help="tpcc items")
    parser.add_argument("--mode", choices=("sync", "pseudo-sync", "async"), default=None)
    parser.add_argument("--batch", type=int, default=None)
    parser.add_argument("--txs", type=int, default=None, help="number of wl statements")
    parser.add_argument("--queries", action="store_true", default=False,
                        help="send read-only statements through query")
    parser.add_argument("--nodes", type=int, default=None)
    parser.add_argument("--timeout-commit", type=float, default=None, help="ms; 0 disables")
    parser.add_argument("--abci-variant", choices=("builtin", "server"), default=None)
    parser.add_argument("--latency-profile", type=str, default=None)
    parser.add_argument("--clock", choices=("virtual", "realtime"), default=None)
    parser.add_argument("--reps", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--stall-timeout", type=float, default=None, help="ms without block events")


def run_config_from_args(args):
    """Merge the YAML config (if any) with the flags that were given."""
    data = load_run_config(args.config).model_dump() if args.config else RunConfig().model_dump()
    params = data.setdefault("workload_params", {})
    network = data["network"]
    for flag, key in (("run_id", "run_id"), ("workload", "workload"), ("mode", "mode"), ("batch", "batch"),
                      ("txs", "n_txs"), ("latency_profile", "latency_profile"), ("reps", "repetitions"),
                      ("seed", "seed"), ("stall_timeout", "stall_timeout_ms")):
        if getattr(args, flag) is not None:
            data[key] = getattr(args, flag)
    if args.mode is not None and args.txs is None and not args.config:
        # let the mode pick its default sequence length
        data["n_txs"] = None
    if args.queries:
        data["queries"] = True
    flags = (("accounts", "n_accounts"),) if data["workload"] == "smallbank" else (
        ("warehouses", "warehouses"), ("customers", "customers"), ("items", "items"))
    for flag, key in flags:
        if getattr(args, flag) is not None:
            params[key] = getattr(args, flag)
    for flag, key in (("nodes", "n_nodes"), ("abci_variant", "abci_variant"), ("clock", "clock")):
        if getattr(args, flag) is not None:
            network[key] = getattr(args, flag)
    if args.timeout_commit is not None:
        network["node"]["timeouts"]["commit"] = args.timeout_commit
    if args.trace_consensus:
        network["node"]["trace_consensus"] = True
    return validated(RunConfig, **data)


def main_bench(args):
    config = run_config_from_args(args)
    try:
        reports = run_repetitions(config)
    except VerificationFailure as e:
        for failure in e.report.failures:
            print(f"FAILED {failure}", file=sys.stderr)
        if args.packing_out:
            e.report.packing.save(args.packing_out)
        return EXIT_VERIFICATION
    emit_csv(reports, args.out)
    if args.packing_out:
        reports[-1].packing.save(args.packing_out)
    for report in reports:
        p50, p95, mean = report.latency_stats()
        print(f"{report.run_id} rep {report.repetition}: {report.n_txs} statements, {report.blocks} blocks, "
              f"end-to-end {report.end_to_end_ms:.1f} ms, latency mean {mean:.1f} ms, "
              f"overhead ratio {report.overhead_ratio:.2f}")
    print(f"results written to {args.out}")
    return EXIT_OK


def main_sweep(args):
    config = run_config_from_args(args)
    values = None
    if args.values:
        values = [float(v) if args.dimension == "timeout_commit" else int(v) for v in args.values.split(",")]
    try:
        _, summary = sweep(config, args.dimension, values=values, save_path=args.out)
    except VerificationFailure as e:
        for failure in e.report.failures:
            print(f"FAILED {failure}", file=sys.stderr)
        return EXIT_VERIFICATION
    print(summary.to_string(index=False))
    print(f"results written to {args.out}")
    return EXIT_OK


def main_replay(args):
    packing = PackingRecord.load(args.packing)
    report = replay_standalone(packing)
    print(f"replayed {report.blocks} blocks ({report.n_txs} statements) in {report.processing_ms:.1f} ms")
    print(f"final state hash {report.app_hash.hex()}")
    if args.out:
        emit_csv([report], args.out)
    if packing.app_hash and packing.app_hash != report.app_hash.hex():
        print(f"MISMATCH: the chain run ended in {packing.app_hash}", file=sys.stderr)
        return EXIT_VERIFICATION
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="relchain", description="relational blockchain benchmark")
    parser.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"))
    parser.add_argument("--trace-consensus", action="store_true", default=False)
    commands = parser.add_subparsers(dest="command", required=True)

    bench = commands.add_parser("bench", help="run one configuration")
    add_run_arguments(bench)
    bench.add_argument("--out", type=str, default="results.csv")
    bench.add_argument("--packing-out", type=str, default=None, help="json file for the block packing")
    bench.set_defaults(main=main_bench)

    sweep_parser = commands.add_parser("sweep", help="sweep one dimension")
    add_run_arguments(sweep_parser)
    sweep_parser.add_argument("--dimension", choices=sorted(SWEEP_POINTS), required=True)
    sweep_parser.add_argument("--values", type=str, default=None, help="comma separated points")
    sweep_parser.add_argument("--out", type=str, default="sweep")
    sweep_parser.set_defaults(main=main_sweep)

    replay = commands.add_parser("replay", help="replay a block packing standalone")
    replay.add_argument("--packing", type=str, required=True)
    replay.add_argument("--out", type=str, default=None)
    replay.set_defaults(main=main_replay)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.main(args)
    except RelchainError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_ERROR
