"""
Standalone replay: the recorded block packing executed directly against a
fresh relational engine, one db-transaction per block, no consensus and
no mempool. Its runtime is the baseline of the framework-overhead ratio.
"""
import logging
import time

from relchain.bench.metrics import MetricsReport
from relchain.workloads import get_workload

logger = logging.getLogger(__name__)


def replay_standalone(packing, workload=None, run_id="replay"):
    """
    :param packing: PackingRecord of a completed chain run
    :param workload: workload holding the same genesis state (default: rebuilt from the record)
    :return: MetricsReport whose app_hash is the final state hash
    """
    if workload is None:
        workload = get_workload(packing.workload, **packing.workload_params)
    engine = workload.make_engine()
    report = MetricsReport(run_id=run_id, workload=packing.workload, mode="standalone", batch=0, n_nodes=0,
                           timeout_commit_ms=0.0, abci_variant="none", latency_profile="none", clock="wall")
    rolled_back = 0
    started = time.perf_counter()
    for block in packing.blocks:
        engine.begin(block.block_time)
        statuses = [engine.execute(statement.text) for statement in block.statements]
        if all(status.ok for status in statuses):
            engine.commit_block()
        else:
            engine.rollback_block()
            rolled_back += 1
    report.processing_ms = (time.perf_counter() - started) * 1000.0
    report.n_txs = packing.n_statements
    report.blocks = len(packing.blocks)
    report.app_hash = engine.state_hash()
    report.packing = packing
    logger.info("replayed %d blocks (%d rolled back) in %.1f ms", report.blocks, rolled_back,
                report.processing_ms)
    return report
