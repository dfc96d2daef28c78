"""
Client drivers. A driver submits one workload sequence to node 0 of a
network and turns what it observed into a MetricsReport.

Times come from the network's scheduler clock: virtual milliseconds for
virtual networks, monotonic wall milliseconds for realtime ones.
"""
import functools
import logging
from concurrent.futures import Future, ThreadPoolExecutor

from relchain.bench.metrics import FailedStatement, MetricsReport, PackingRecord
from relchain.errors import BroadcastTimeout, Rejected, Stall, VerificationFailure
from relchain.netsim.network import spawn_network
from relchain.relational.backend import RelationalBackend
from relchain.workloads import batch, get_workload

logger = logging.getLogger(__name__)


def backend_factory(workload):
    """Callable producing backends that each hold a private copy of the genesis state."""
    genesis = workload.make_database()
    return lambda: RelationalBackend(workload.make_engine(genesis))


def open_network(config, workload=None):
    workload = workload if workload is not None else get_workload(config.workload, **config.workload_config())
    return spawn_network(config.network_config(), backend_factory(workload))


def new_report(config, network, mode=None):
    net = network.config
    return MetricsReport(run_id=config.run_id, workload=config.workload, mode=mode or config.mode,
                         batch=config.batch, n_nodes=net.n_nodes, timeout_commit_ms=net.node.timeouts.commit,
                         abci_variant=net.abci_variant, latency_profile=net.latency.name, clock=net.clock)


def write_sequence(config, workload):
    return workload.sequence(config.n_txs)


def query_sequence(config, workload):
    return [workload.query_statement(i) for i in range(config.n_txs)]


def _with_network(sequence):
    """
    Driver decorator: fills in the workload and its statement sequence and
    spawns (and afterwards closes) a network unless the caller passed one.
    """

    def decorate(run):
        @functools.wraps(run)
        def wrapper(config, network=None, statements=None, workload=None):
            if workload is None:
                workload = get_workload(config.workload, **config.workload_config())
            statements = list(statements) if statements is not None else sequence(config, workload)
            if network is not None:
                return run(config, network, statements, workload)
            with open_network(config, workload) as own:
                return run(config, own, statements, workload)

        return wrapper

    return decorate


def inspect_blocks(rpc, heights, config):
    """Fetch the given blocks, collecting the packing record and every failed statement."""
    packing = PackingRecord(config.workload, config.workload_config())
    failures = []
    for height in heights:
        block, statuses = rpc.fetch_block(height)
        statements = []
        for tx_index, (tx, tx_statuses) in enumerate(zip(block.txs, statuses)):
            statements.extend(tx.statements)
            for stmt_index, (statement, status) in enumerate(zip(tx.statements, tx_statuses)):
                if not status.ok:
                    failures.append(FailedStatement(height, tx_index, stmt_index, statement.text, status.reason))
        packing.add(height, block.header.block_time, statements)
    return packing, failures


@_with_network(write_sequence)
def run_sync(config, network, statements, workload):
    """
    Submit batch(statements, B) one bc-transaction at a time through
    broadcast_tx_commit, waiting for each before sending the next.
    """
    rpc = network.rpc(0)
    clock = network.scheduler.now
    txs = batch(statements, config.batch)
    report = new_report(config, network)
    heights = []
    started = clock()
    for index, tx in enumerate(txs):
        sent = clock()
        try:
            response = rpc.broadcast_tx_commit(tx)
        except (Rejected, BroadcastTimeout) as e:
            logger.error("%s: bc-tx %d of %d aborted the run after %.1f ms: %s",
                         config.run_id, index + 1, len(txs), clock() - started, e)
            raise
        elapsed = clock() - sent
        report.latencies_ms.extend([elapsed / len(tx.statements)] * len(tx.statements))
        if not heights or heights[-1] != response.height:
            heights.append(response.height)
        report.bc_txs += 1
        report.n_txs += len(tx.statements)
    report.processing_ms = clock() - started

    inspected = clock()
    report.packing, report.failures = inspect_blocks(rpc, heights, config)
    report.inspection_ms = clock() - inspected
    report.blocks = len(heights)
    report.app_hash = network.nodes[0].app_hash
    report.packing.app_hash = report.app_hash.hex()
    logger.info("%s: %d bc-txs in %d blocks, %.1f ms", config.run_id, report.bc_txs, report.blocks,
                report.end_to_end_ms)
    if report.failures:
        raise VerificationFailure(report)
    return report


def _send(rpc, txs, handoff):
    """Sender: push every tx through broadcast_tx_sync and hand the admitted count over."""
    admitted = []
    try:
        for tx in txs:
            response = rpc.broadcast_tx_sync(tx)
            if response.accepted:
                admitted.append(tx)
            else:
                logger.warning("bc-tx %s not admitted: %s", tx.tx_hash.hex()[:12], response.reason)
    except BaseException as e:
        handoff.set_exception(e)
        raise
    handoff.set_result(len(admitted))
    return admitted


def _listen(stream, handoff, watchdog_ms, clock, started):
    """Listener: tally num_txs of NewBlockHeader events until the admitted total is reached."""
    seen, events = 0, []
    while True:
        total = handoff.result() if handoff.done() else None
        if total is not None and seen >= total:
            return events
        event = stream.next(timeout_ms=watchdog_ms)
        if event is None:
            if total is None:
                continue
            raise Stall(f"no block event for {watchdog_ms:.0f} ms with {seen} of {total} bc-txs seen")
        seen += event.num_txs
        events.append((event.height, clock() - started, event.num_txs))


@_with_network(write_sequence)
def run_async(config, network, statements, workload):
    """
    The asynchronous workflow: sender and listener start together, the
    sender hands its admission count to the listener, and once the listener
    has seen that many bc-transactions committed the coordinator fetches the
    identified blocks and verifies every statement status.
    """
    rpc = network.rpc(0)
    scheduler = network.scheduler
    clock = scheduler.now
    txs = batch(statements, config.batch)
    report = new_report(config, network)
    stream = rpc.subscribe_new_block_header()
    handoff = Future()
    started = clock()
    try:
        if scheduler.virtual:
            admitted = _send(rpc, txs, handoff)
            events = _listen(stream, handoff, config.stall_timeout_ms, clock, started)
        else:
            with ThreadPoolExecutor(max_workers=2, thread_name_prefix="relchain-client") as pool:
                sender = pool.submit(_send, rpc, txs, handoff)
                listener = pool.submit(_listen, stream, handoff, config.stall_timeout_ms, clock, started)
                admitted = sender.result()
                events = listener.result()
    finally:
        rpc.unsubscribe(stream)
    report.processing_ms = clock() - started
    report.bc_txs = len(admitted)
    report.n_txs = sum(len(tx.statements) for tx in admitted)
    report.block_latencies = events

    inspected = clock()
    report.packing, report.failures = inspect_blocks(rpc, [height for height, _, _ in events], config)
    report.inspection_ms = clock() - inspected
    report.blocks = len(events)
    for (_, at, _), block in zip(events, report.packing.blocks):
        report.latencies_ms.extend([at] * len(block.statements))
    report.app_hash = network.nodes[0].app_hash
    report.packing.app_hash = report.app_hash.hex()
    logger.info("%s: %d bc-txs (%d statements) in %d blocks, %.1f ms processing + %.1f ms inspection",
                config.run_id, report.bc_txs, report.n_txs, report.blocks, report.processing_ms,
                report.inspection_ms)
    if report.failures:
        logger.error("%s: %d failed statement(s), first: %s", config.run_id, len(report.failures),
                     report.failures[0])
        raise VerificationFailure(report)
    return report


@_with_network(query_sequence)
def run_queries(config, network, statements, workload):
    """Answer every statement through query; no transaction ever enters the chain."""
    rpc = network.rpc(0)
    clock = network.scheduler.now
    report = new_report(config, network, mode="query")
    started = clock()
    for statement in statements:
        sent = clock()
        rpc.query(statement.text)
        report.latencies_ms.append(clock() - sent)
    report.processing_ms = clock() - started
    report.n_txs = len(statements)
    report.app_hash = network.nodes[0].app_hash
    return report
