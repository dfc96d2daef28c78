from relchain.bench.drivers import open_network, run_async, run_queries, run_sync
from relchain.bench.get_driver import drivers, get_driver
from relchain.bench.metrics import CSV_COLUMNS, FailedStatement, MetricsReport, PackedBlock, PackingRecord, emit_csv
from relchain.bench.replay import replay_standalone
from relchain.bench.run_runs import run_once, run_repetitions
from relchain.bench.sweep import SWEEP_POINTS, sweep
