"""
Here we repeatedly run one benchmark configuration, time the standalone
replay of every run and collect the reports
"""
import logging

from relchain.bench.drivers import open_network
from relchain.bench.get_driver import get_driver
from relchain.bench.metrics import emit_csv
from relchain.bench.replay import replay_standalone
from relchain.workloads import get_workload

logger = logging.getLogger(__name__)


def run_once(config, workload=None, statements=None, replay=True):
    """One run on a fresh network; with replay the standalone baseline is timed too."""
    workload = workload if workload is not None else get_workload(config.workload, **config.workload_config())
    driver = get_driver(config)
    with open_network(config, workload) as network:
        report = driver(config, network=network, statements=statements, workload=workload)
    if replay and report.packing is not None:
        baseline = replay_standalone(report.packing, workload)
        report.standalone_ms = baseline.processing_ms
        if baseline.app_hash != report.app_hash:
            logger.warning("%s: standalone replay ended in state %s, the chain in %s", config.run_id,
                           baseline.app_hash.hex()[:16], report.app_hash.hex()[:16])
    return report


def run_repetitions(config, statements=None, save_path=None, replay=True):
    """config.repetitions runs of config; results.csv is written under save_path when given."""
    workload = get_workload(config.workload, **config.workload_config())
    reports = []
    for repetition in range(config.repetitions):
        report = run_once(config, workload, statements=statements, replay=replay)
        report.repetition = repetition
        logger.info("%s rep %d: end-to-end %.1f ms, %d blocks, overhead ratio %.2f", config.run_id, repetition,
                    report.end_to_end_ms, report.blocks, report.overhead_ratio)
        reports.append(report)
    if save_path is not None:
        emit_csv(reports, f"{save_path}/results.csv")
    return reports
